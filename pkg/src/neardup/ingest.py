"""Corpus construction from a social feed source.

A feed source is either a local NDJSON file or an HTTP endpoint returning
NDJSON pages (one post object per line) with cursor pagination: the client
requests ``GET <url>?cursor=<token>`` and follows the ``X-Next-Cursor``
response header until it is absent. Post schema, all snake_case::

    {"post_id": str, "text": str, "created_at": RFC3339 UTC,
     "is_retweet": bool, "image_urls": [str, ...],
     "author": {"username": str, "display_name": str, "description": str,
                "location": str, "profile_image_url": str, "profile_url": str}}

Downloaded images are content-addressed (sha256 of the bytes) so the same
picture reposted under many URLs is stored once, with every referencing
post recorded. On disk a corpus is::

    <dir>/meta.json        corpus id, keywords, source, created_at, image index
    <dir>/posts.ndjson     one post per line
    <dir>/images/<sha>.<ext>
    <dir>/failures.ndjson  one failed download per line
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import requests

from .errors import (
    HashMismatch,
    MalformedImage,
    MissingMetadata,
    OrphanImage,
    SourceUnreachable,
    StoreWriteError,
    UnsupportedFormat,
)
from .imagecore import decode_image

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_JPEG_MAGIC = b"\xff\xd8\xff"
HTTP_TIMEOUT = 10.0


@dataclass(frozen=True)
class UserProfile:
    username: str
    display_name: str = ""
    description: str = ""
    location: str = ""
    profile_image_url: str = ""
    profile_url: str = ""


@dataclass(frozen=True)
class Post:
    post_id: str
    text: str
    author: UserProfile
    created_at: str
    is_retweet: bool
    image_urls: tuple = ()


@dataclass
class ImageRecord:
    sha256: str
    file: str  # path relative to the corpus root
    post_ids: list = field(default_factory=list)
    source_urls: list = field(default_factory=list)


@dataclass
class Corpus:
    corpus_id: str
    keywords: list
    source: str
    created_at: str
    posts: list
    images: dict  # sha256 -> ImageRecord
    failures: list = field(default_factory=list)
    root: Path | None = None

    def image_path(self, sha: str) -> Path:
        if self.root is None:
            raise ValueError("corpus has no on-disk root")
        return self.root / self.images[sha].file


class FeedError(ValueError):
    """A single malformed feed record (skipped and counted by the caller)."""


def parse_post(obj: dict) -> Post:
    if not isinstance(obj, dict):
        raise FeedError("record is not an object")
    post_id = obj.get("post_id")
    author = obj.get("author") or {}
    username = (author.get("username") or "").strip()
    if not post_id or not username:
        raise FeedError("post_id and author.username are required")
    created = obj.get("created_at") or ""
    try:
        datetime.fromisoformat(str(created).replace("Z", "+00:00"))
    except ValueError as exc:
        raise FeedError(f"bad created_at {created!r}") from exc
    profile = UserProfile(
        username=username,
        display_name=author.get("display_name", ""),
        description=author.get("description", ""),
        location=author.get("location", ""),
        profile_image_url=author.get("profile_image_url", ""),
        profile_url=author.get("profile_url", ""),
    )
    return Post(
        post_id=str(post_id),
        text=obj.get("text", "") or "",
        author=profile,
        created_at=str(created),
        is_retweet=bool(obj.get("is_retweet", False)),
        image_urls=tuple(obj.get("image_urls") or ()),
    )


def post_to_json(post: Post) -> dict:
    data = asdict(post)
    data["image_urls"] = list(post.image_urls)
    return data


def _iter_feed_lines(source: str):
    if re.match(r"^https?://", source):
        cursor = None
        while True:
            params = {"cursor": cursor} if cursor else {}
            try:
                resp = requests.get(source, params=params, timeout=HTTP_TIMEOUT)
                resp.raise_for_status()
            except requests.RequestException as exc:
                raise SourceUnreachable(f"{source}: {exc}") from exc
            for line in resp.text.splitlines():
                yield line
            cursor = resp.headers.get("X-Next-Cursor")
            if not cursor:
                return
    else:
        path = Path(source)
        if not path.is_file():
            raise SourceUnreachable(f"no such feed file: {source}")
        with open(path, encoding="utf-8") as fh:
            yield from fh


def fetch_posts(source: str, keywords: list, max_posts: int):
    """Keyword-matched posts from a feed source.

    Returns ``(posts, skipped)`` where skipped counts malformed records.
    Matching is case-insensitive substring against the post text; a post
    matches when it contains at least one keyword.
    """
    if not keywords:
        raise ValueError("keywords must be non-empty")
    needles = [k.lower() for k in keywords if k.strip()]
    posts = []
    skipped = 0
    for line in _iter_feed_lines(source):
        line = line.strip()
        if not line:
            continue
        try:
            post = parse_post(json.loads(line))
        except (json.JSONDecodeError, FeedError):
            skipped += 1
            continue
        text = post.text.lower()
        if any(n in text for n in needles):
            posts.append(post)
            if len(posts) >= max_posts:
                break
    return posts, skipped


def filter_image_posts(posts):
    """Posts carrying at least one image URL, order preserved."""
    return [p for p in posts if p.image_urls]


def _default_fetch(url: str) -> bytes:
    resp = requests.get(url, timeout=HTTP_TIMEOUT)
    resp.raise_for_status()
    return resp.content


def _extension_for(data: bytes) -> str:
    if data.startswith(_PNG_MAGIC):
        return "png"
    if data.startswith(_JPEG_MAGIC):
        return "jpg"
    raise UnsupportedFormat("not a PNG or JPEG payload")


def download_images(posts, store_dir, fetch=None):
    """Fetch every distinct image URL once and store content-addressed.

    Returns ``(records, failures)``: sha256 -> ImageRecord plus a list of
    per-URL failure entries. Byte-identical content from different URLs
    deduplicates into a single record with merged references.
    """
    fetch = fetch or _default_fetch
    store_dir = Path(store_dir)
    images_dir = store_dir / "images"
    try:
        images_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise StoreWriteError(str(exc)) from exc

    url_refs: dict[str, list] = {}
    for post in posts:
        for url in post.image_urls:
            url_refs.setdefault(url, []).append(post.post_id)

    records: dict[str, ImageRecord] = {}
    failures = []
    for url, post_ids in url_refs.items():
        try:
            data = fetch(url)
            ext = _extension_for(data)
            decode_image(data)  # reject undecodable payloads up front
        except Exception as exc:
            failures.append({"url": url, "reason": str(exc)})
            continue
        sha = hashlib.sha256(data).hexdigest()
        rel = f"images/{sha}.{ext}"
        target = store_dir / rel
        if not target.exists():
            try:
                target.write_bytes(data)
            except OSError as exc:
                raise StoreWriteError(str(exc)) from exc
        record = records.setdefault(sha, ImageRecord(sha256=sha, file=rel))
        for pid in post_ids:
            if pid not in record.post_ids:
                record.post_ids.append(pid)
        if url not in record.source_urls:
            record.source_urls.append(url)
    return records, failures


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat().replace("+00:00", "Z")


def derive_corpus_id(source: str, keywords: list) -> str:
    slug = re.sub(r"[^a-z0-9]+", "-", "-".join(keywords).lower()).strip("-")[:40] or "corpus"
    digest = hashlib.sha256(f"{source}|{','.join(keywords)}".encode()).hexdigest()[:8]
    return f"{slug}-{digest}"


def save_corpus(corpus: Corpus, out_dir) -> Corpus:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    meta = {
        "corpus_id": corpus.corpus_id,
        "keywords": list(corpus.keywords),
        "source": corpus.source,
        "created_at": corpus.created_at,
        "images": {sha: {"file": rec.file, "post_ids": rec.post_ids,
                         "source_urls": rec.source_urls}
                   for sha, rec in sorted(corpus.images.items())},
    }
    (out_dir / "meta.json").write_text(json.dumps(meta, indent=2))
    with open(out_dir / "posts.ndjson", "w") as fh:
        for post in corpus.posts:
            fh.write(json.dumps(post_to_json(post)) + "\n")
    with open(out_dir / "failures.ndjson", "w") as fh:
        for failure in corpus.failures:
            fh.write(json.dumps(failure) + "\n")
    corpus.root = out_dir
    return corpus


def load_corpus(path) -> Corpus:
    """Load and fully validate an on-disk corpus.

    Every image record's file must hash to its key (HashMismatch names the
    offending file, including records whose file is missing) and every file
    under images/ must be indexed (OrphanImage).
    """
    root = Path(path)
    meta_path = root / "meta.json"
    if not meta_path.is_file():
        raise MissingMetadata(f"{meta_path} not found")
    meta = json.loads(meta_path.read_text())

    posts = []
    posts_path = root / "posts.ndjson"
    if posts_path.is_file():
        with open(posts_path) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    posts.append(parse_post(json.loads(line)))

    images = {}
    for sha, rec in meta.get("images", {}).items():
        file_path = root / rec["file"]
        if not file_path.is_file():
            raise HashMismatch(f"{file_path}: recorded image file is missing")
        digest = hashlib.sha256(file_path.read_bytes()).hexdigest()
        if digest != sha:
            raise HashMismatch(f"{file_path}: content hash {digest} != record {sha}")
        images[sha] = ImageRecord(sha256=sha, file=rec["file"],
                                  post_ids=list(rec.get("post_ids", [])),
                                  source_urls=list(rec.get("source_urls", [])))

    images_dir = root / "images"
    if images_dir.is_dir():
        for f in images_dir.iterdir():
            if f.is_file() and f.stem not in images:
                raise OrphanImage(f"{f}: file not present in corpus index")

    failures = []
    failures_path = root / "failures.ndjson"
    if failures_path.is_file():
        with open(failures_path) as fh:
            failures = [json.loads(line) for line in fh if line.strip()]

    return Corpus(corpus_id=meta["corpus_id"], keywords=list(meta.get("keywords", [])),
                  source=meta.get("source", ""), created_at=meta.get("created_at", ""),
                  posts=posts, images=images, failures=failures, root=root)


def ingest_corpus(source: str, keywords: list, out_dir, max_posts: int = 500,
                  corpus_id: str | None = None, fetch=None) -> Corpus:
    """End-to-end ingestion: fetch posts, keep the ones with images, download
    and deduplicate the images, persist the corpus directory."""
    out_dir = Path(out_dir)
    posts, _ = fetch_posts(source, keywords, max_posts)
    image_posts = filter_image_posts(posts)
    records, failures = download_images(image_posts, out_dir, fetch=fetch)
    created_at = _utcnow()
    meta_path = out_dir / "meta.json"
    if meta_path.is_file():  # re-ingest keeps the original creation stamp
        try:
            created_at = json.loads(meta_path.read_text()).get("created_at", created_at)
        except (json.JSONDecodeError, OSError):
            pass
    corpus = Corpus(
        corpus_id=corpus_id or derive_corpus_id(source, keywords),
        keywords=list(keywords),
        source=source,
        created_at=created_at,
        posts=posts,
        images=records,
        failures=failures,
    )
    return save_corpus(corpus, out_dir)
