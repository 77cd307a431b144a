"""Post-retrieval spread analysis: who propagates, sentiment, retweet share.

Sentiment uses a pluggable provider; the default is a bundled lexicon
scorer (token polarity sum with a one-token negation flip), which keeps
results deterministic and offline. Texts without lexicon hits - broken
language, non-English, or no text at all - come out Neutral, which is also
the dominant class in the wild.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources

from .errors import CorpusNotFound, EmptyPostSet
from .ingest import Corpus, Post, UserProfile

LEXICON_FILE = "sentiment_lexicon_v1.tsv"
NEGATORS = frozenset((
    "not", "no", "never", "cannot", "cant", "dont", "doesnt", "didnt", "wont",
    "isnt", "arent", "wasnt", "werent", "nothing", "neither", "nor", "without",
))

_TOKEN_RE = re.compile(r"[a-z]+")


class SentimentLabel(Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NEUTRAL = "neutral"


_lexicon_cache: dict[str, int] | None = None


def load_lexicon() -> dict[str, int]:
    global _lexicon_cache
    if _lexicon_cache is None:
        text = resources.files("neardup.data").joinpath(LEXICON_FILE).read_text()
        table: dict[str, int] = {}
        for line in text.strip().splitlines():
            if not line or line.startswith("#"):
                continue
            token, polarity = line.split("\t")
            table[token] = int(polarity)
        _lexicon_cache = table
    return _lexicon_cache


def _tokenize(text: str) -> list[str]:
    # drop apostrophes so "don't" negates like "dont"
    return _TOKEN_RE.findall(text.lower().replace("'", ""))


def sentiment(text: str, lexicon: dict[str, int] | None = None) -> SentimentLabel:
    """Lexicon polarity sum; a negator immediately before a scored token
    flips that token's sign ("good" positive, "not good" negative)."""
    lex = lexicon if lexicon is not None else load_lexicon()
    tokens = _tokenize(text or "")
    total = 0
    for i, token in enumerate(tokens):
        polarity = lex.get(token)
        if polarity is None:
            continue
        if i > 0 and tokens[i - 1] in NEGATORS:
            polarity = -polarity
        total += polarity
    if total > 0:
        return SentimentLabel.POSITIVE
    if total < 0:
        return SentimentLabel.NEGATIVE
    return SentimentLabel.NEUTRAL


def sentiment_summary(posts: list[Post]) -> dict:
    """Percent of posts labeled positive/negative/neutral (full precision)."""
    if not posts:
        raise EmptyPostSet("no posts to summarize")
    counts = {SentimentLabel.POSITIVE: 0, SentimentLabel.NEGATIVE: 0,
              SentimentLabel.NEUTRAL: 0}
    for post in posts:
        counts[sentiment(post.text)] += 1
    n = len(posts)
    return {"pos_pct": 100.0 * counts[SentimentLabel.POSITIVE] / n,
            "neg_pct": 100.0 * counts[SentimentLabel.NEGATIVE] / n,
            "neu_pct": 100.0 * counts[SentimentLabel.NEUTRAL] / n}


def retweet_summary(posts: list[Post]) -> float:
    """Percent of posts that are retweets."""
    if not posts:
        raise EmptyPostSet("no posts to summarize")
    return 100.0 * sum(1 for p in posts if p.is_retweet) / len(posts)


def posts_for_result(result, corpus: Corpus) -> list[Post]:
    """Posts referencing any retrieved image, in corpus order, each once."""
    if corpus is None:
        raise CorpusNotFound("result has no loaded corpus")
    wanted = set()
    for sha in result.retrieved_shas:
        wanted.update(corpus.images[sha].post_ids)
    return [p for p in corpus.posts if p.post_id in wanted]


def propagating_users(result, corpus: Corpus) -> list[tuple[UserProfile, int]]:
    """Users behind the retrieved images with per-user post counts, sorted by
    count descending then username; counts sum to the contributing posts."""
    posts = posts_for_result(result, corpus)
    by_user: dict[str, tuple[UserProfile, int]] = {}
    for post in posts:
        profile, count = by_user.get(post.author.username, (post.author, 0))
        by_user[post.author.username] = (profile, count + 1)
    return sorted(by_user.values(), key=lambda uc: (-uc[1], uc[0].username))


@dataclass(frozen=True)
class SpreadReport:
    """Analytics bundle for one retrieval result."""

    users: tuple  # of (UserProfile, post count)
    sentiment_pct: dict
    retweet_pct: float
    reduction_pct: float
    post_count: int


def build_spread_report(result, corpus: Corpus) -> SpreadReport:
    """Aggregate user/sentiment/retweet analytics over the posts that carried
    the retrieved images. With nothing retrieved the report is all-neutral."""
    posts = posts_for_result(result, corpus)
    users = tuple(propagating_users(result, corpus))
    if posts:
        sent = sentiment_summary(posts)
        retweets = retweet_summary(posts)
    else:
        sent = {"pos_pct": 0.0, "neg_pct": 0.0, "neu_pct": 100.0}
        retweets = 0.0
    return SpreadReport(users=users, sentiment_pct=sent, retweet_pct=retweets,
                        reduction_pct=result.reduction_pct, post_count=len(posts))
