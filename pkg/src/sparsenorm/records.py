"""Publication-level domain records shared by ingest, cohort, and synth."""

from __future__ import annotations

from dataclasses import dataclass, field

from enum import Enum

from .errors import InvalidConfigError, InvalidScoreError, NegativeCountError

VALID_SCORES = (1, 2, 3)


class MentionSource(str, Enum):
    """Closed set of mention sources a publication can be counted against."""

    CITATIONS = "citations"
    TWITTER_ALL = "twitter_all"
    TWITTER_RESEARCHERS = "twitter_researchers"
    TWITTER_SCIENCE_COMMUNICATORS = "twitter_science_communicators"
    TWITTER_PRACTITIONERS = "twitter_practitioners"
    TWITTER_PUBLIC = "twitter_public"

    @classmethod
    def from_label(cls, label: str) -> "MentionSource":
        """Parse a source label, rejecting anything outside the closed set."""
        try:
            return cls(label)
        except ValueError:
            known = ", ".join(s.value for s in cls)
            raise InvalidConfigError(
                f"unknown mention source {label!r}; known sources: {known}"
            ) from None


@dataclass(slots=True)
class PublicationRecord:
    """One paper: identity, stratum coordinates, mention counts, peer scores.

    ``categories`` must be non-empty; a paper with k categories later counts
    fully in each of its k strata.  ``mentions`` maps a source to the number
    of times the paper was mentioned there (0 is meaningful and distinct from
    absent: absent means the source was never joined).
    """

    id: str
    year: int
    categories: tuple[str, ...]
    mentions: dict[MentionSource, int] = field(default_factory=dict)
    recommendation_scores: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not self.id:
            raise InvalidConfigError("publication id must be non-empty")
        if not self.categories or any(not c for c in self.categories):
            raise InvalidConfigError(
                f"publication {self.id!r} needs at least one non-empty category"
            )
        for count in self.mentions.values():
            if count < 0:
                raise NegativeCountError(
                    f"publication {self.id!r} has a negative mention count"
                )
        for score in self.recommendation_scores:
            if score not in VALID_SCORES:
                raise InvalidScoreError(
                    f"publication {self.id!r} has score {score!r}; "
                    f"allowed scores are {VALID_SCORES}"
                )

    def mention_count(self, source: MentionSource) -> int:
        return self.mentions.get(source, 0)

    def is_mentioned(self, source: MentionSource) -> bool:
        return self.mention_count(source) > 0
