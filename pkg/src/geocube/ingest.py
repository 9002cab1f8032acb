"""Post stream ingestion: record parsing, ILI keyword classification, and
a deterministic synthetic stream generator used as the offline stand-in for
a live crawler."""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator

import numpy as np

from geocube import grid
from geocube.geo import DEG_KM

DEFAULT_KEYWORDS = frozenset({"flu", "cough", "sneeze", "fever"})
_SUFFIXES = ("s", "es", "ed", "ing")
_TOKEN_RE = re.compile(r"[a-z]+")


class MalformedRecord(ValueError):
    """Input record is missing a field or has an unparsable value."""


class OutOfBounds(ValueError):
    """Record coordinates fall outside the study bounding box."""


@dataclass(frozen=True)
class Post:
    """One geotagged, timestamped message from one user."""

    user_id: str
    lon: float
    lat: float
    ts: int  # UTC epoch seconds
    text: str
    flu_flag: bool = False

    def classified(self, dictionary: "IliDictionary") -> "Post":
        return replace(self, flu_flag=classify_ili(self.text, dictionary))


@dataclass(frozen=True)
class IliDictionary:
    """Lowercase symptom keyword stems."""

    entries: frozenset[str] = DEFAULT_KEYWORDS

    def __post_init__(self):
        if not self.entries:
            raise ValueError("dictionary must be non-empty")
        for e in self.entries:
            if e != e.lower() or any(ch.isspace() for ch in e):
                raise ValueError(f"bad dictionary entry {e!r}")

    @classmethod
    def from_file(cls, path) -> "IliDictionary":
        with open(path, encoding="utf-8") as fh:
            entries = frozenset(line.strip().lower() for line in fh if line.strip())
        return cls(entries)


def classify_ili(text: str, dictionary: IliDictionary | None = None) -> bool:
    """True iff some token of the lowercased text matches a keyword stem.

    A token matches an entry when it equals the entry or is the entry plus
    one inflection suffix (s/es/ed/ing) — so "coughing" matches "cough" but
    "influence" does not match "flu".
    """
    entries = (dictionary or IliDictionary()).entries
    for token in _TOKEN_RE.findall(text.lower()):
        if token in entries:
            return True
        for suffix in _SUFFIXES:
            if token.endswith(suffix) and token[: -len(suffix)] in entries:
                return True
    return False


_FIELDS = ("user_id", "lon", "lat", "timestamp", "text")


def parse_record(line: str | dict, fmt: str = "jsonl") -> Post:
    """Parse one input record (JSON object or CSV dict row) into a Post.

    flu_flag is left unset pending classification.  Raises MalformedRecord
    for schema/parse failures and OutOfBounds for strays outside the study
    area; callers count and skip both.
    """
    if isinstance(line, dict):
        obj = line
    elif fmt == "jsonl":
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(str(exc)) from None
        if not isinstance(obj, dict):
            raise MalformedRecord("record is not an object")
    else:
        raise MalformedRecord(f"unknown format {fmt!r}")

    missing = [f for f in _FIELDS if f not in obj or obj[f] is None]
    if missing:
        raise MalformedRecord(f"missing fields: {', '.join(missing)}")
    try:
        lon = float(obj["lon"])
        lat = float(obj["lat"])
        ts = grid.parse_utc(str(obj["timestamp"]))
    except (TypeError, ValueError) as exc:
        raise MalformedRecord(str(exc)) from None
    if not (math.isfinite(lon) and math.isfinite(lat)):
        raise MalformedRecord("non-finite coordinates")
    if not grid.in_bbox(lon, lat):
        raise OutOfBounds(f"({lon}, {lat}) outside study bbox")
    return Post(str(obj["user_id"]), lon, lat, ts, str(obj["text"]))


def serialize_post(post: Post) -> str:
    """Inverse of parse_record for the jsonl format."""
    return json.dumps(
        {
            "user_id": post.user_id,
            "lon": post.lon,
            "lat": post.lat,
            "timestamp": grid.format_utc(post.ts),
            "text": post.text,
        },
        separators=(",", ":"),
    )


def iter_records(fh: io.TextIOBase, fmt: str) -> Iterator[str | dict]:
    if fmt == "jsonl":
        for line in fh:
            if line.strip():
                yield line
    elif fmt == "csv":
        yield from csv.DictReader(fh)
    else:
        raise ValueError(f"unknown format {fmt!r}")


@dataclass(frozen=True)
class SynthConfig:
    """Fixture stream parameters.  Rates are means; output is deterministic
    for a fixed rng_seed."""

    n_users: int = 50
    duration_hours: float = 24.0
    posts_per_user_per_day: float = 8.0
    travel_probability: float = 0.05
    ili_probability: float = 0.02
    rng_seed: int = 7
    start_ts: int = grid.DEFAULT_EPOCH

    def __post_init__(self):
        if self.n_users < 1:
            raise ValueError("n_users must be >= 1")
        for p in (self.travel_probability, self.ili_probability):
            if not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must be in [0, 1]")


# users' homes are scattered around metro anchors well inside the bbox so
# flow maps and gyration radii come out non-degenerate
_METRO_ANCHORS = [
    (-118.24, 34.05),   # Los Angeles
    (-122.42, 37.77),   # San Francisco
    (-115.14, 36.17),   # Las Vegas
    (-112.07, 33.45),   # Phoenix
    (-104.99, 39.74),   # Denver
    (-111.89, 40.76),   # Salt Lake City
    (-87.63, 41.88),    # Chicago
    (-74.01, 40.71),    # New York
    (-95.37, 29.76),    # Houston
    (-80.19, 25.76),    # Miami
]

_NEUTRAL_TEXTS = [
    "lovely weather today",
    "coffee downtown",
    "traffic is terrible",
    "great game last night",
    "at the airport",
    "lunch with friends",
]
_ILI_TEXTS = [
    "down with the flu",
    "coughing all night",
    "running a fever",
    "sneezing nonstop today",
]

_LOCAL_SIGMA_KM = 1.2
_LOCAL_CLIP_KM = 4.0


def synth_stream(cfg: SynthConfig) -> list[Post]:
    """Generate a home-anchored post stream, globally sorted by timestamp.

    Each user gets a fixed home near a metro anchor; most posts take small
    Gaussian steps around home (clipped to ~4 km) and with probability
    travel_probability jump to another metro.  Texts are drawn from neutral
    or symptom-bearing templates; flu_flag is left for the classifier.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    duration_s = int(cfg.duration_hours * 3600)
    posts: list[Post] = []
    n_posts = max(1, int(round(cfg.posts_per_user_per_day * cfg.duration_hours / 24.0)))

    for u in range(cfg.n_users):
        anchor = _METRO_ANCHORS[int(rng.integers(len(_METRO_ANCHORS)))]
        home_lon = anchor[0] + rng.normal(0.0, 0.05)
        home_lat = anchor[1] + rng.normal(0.0, 0.05)
        user_id = f"u{u:05d}"

        times = np.sort(rng.integers(0, max(1, duration_s), size=n_posts))
        # enforce strictly increasing seconds so (user, timestamp) is unique
        for i in range(1, len(times)):
            if times[i] <= times[i - 1]:
                times[i] = times[i - 1] + 1

        for i, dt in enumerate(times):
            if i == 0:
                lon, lat = home_lon, home_lat
            elif rng.random() < cfg.travel_probability:
                far = _METRO_ANCHORS[int(rng.integers(len(_METRO_ANCHORS)))]
                lon = far[0] + rng.normal(0.0, 0.05)
                lat = far[1] + rng.normal(0.0, 0.05)
            else:
                dx, dy = rng.normal(0.0, _LOCAL_SIGMA_KM, size=2)
                r = math.hypot(dx, dy)
                if r > _LOCAL_CLIP_KM:
                    dx, dy = dx * _LOCAL_CLIP_KM / r, dy * _LOCAL_CLIP_KM / r
                lat = home_lat + dy / DEG_KM
                lon = home_lon + dx / (DEG_KM * math.cos(math.radians(home_lat)))
            if rng.random() < cfg.ili_probability:
                text = _ILI_TEXTS[int(rng.integers(len(_ILI_TEXTS)))]
            else:
                text = _NEUTRAL_TEXTS[int(rng.integers(len(_NEUTRAL_TEXTS)))]
            lon = min(max(lon, grid.LON_MIN), grid.LON_MAX)
            lat = min(max(lat, grid.LAT_MIN), grid.LAT_MAX)
            posts.append(Post(user_id, lon, lat, cfg.start_ts + int(dt), text))

    posts.sort(key=lambda p: (p.ts, p.user_id))
    return posts


def classify_stream(posts: Iterable[Post], dictionary: IliDictionary | None = None) -> list[Post]:
    d = dictionary or IliDictionary()
    return [p.classified(d) for p in posts]
