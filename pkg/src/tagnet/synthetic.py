"""Seeded synthetic corpora for benchmarks and the bundled demo fixture."""

from __future__ import annotations

import json
import random
from datetime import datetime, timedelta, timezone


def planted_corpus(
    n_topics: int = 4,
    tags_per_topic: int = 25,
    n_posts: int = 2000,
    p_in: float = 0.3,
    p_out: float = 0.01,
    seed: int = 0,
):
    """Posts drawn from planted hashtag topics.

    Each post picks a topic uniformly, then includes every tag of that
    topic with probability ``p_in`` and every other tag with probability
    ``p_out``. Returns ``(list of tag tuples, {tag: topic})``.
    """
    rng = random.Random(seed)
    topics = [[f"topic{t}_{j:02d}" for j in range(tags_per_topic)] for t in range(n_topics)]
    truth = {tag: t for t, tags in enumerate(topics) for tag in tags}
    posts = []
    for _ in range(n_posts):
        home = rng.randrange(n_topics)
        tags = []
        for t, group in enumerate(topics):
            p = p_in if t == home else p_out
            tags.extend(tag for tag in group if rng.random() < p)
        posts.append(tuple(tags))
    return posts, truth


# Themes loosely modelled on coastal-park posts; spelling variants,
# foreign-language tags, advertisements and bot repeats are mixed in so the
# fixture exercises every cleaning rule.
_THEMES = {
    "diving": ["diving", "scubadiving", "underwater", "coral", "Corals", "reef", "fish",
               "turtle", "Turtles", "snorkeling", "buceo", "padi", "oceanlife"],
    "travel": ["travel", "traveller", "traveler", "Travelgram", "australia", "queensland",
               "holiday", "beach", "Beaches", "playa", "wanderlust", "cairns", "islandlife"],
    "nature": ["nature", "wildlife", "bird", "Birds", "photography", "naturephotography",
               "sunset", "landscape", "rainforest", "conservation", "climatechange", "savethereef"],
}
_ADS = ["sale", "giveaway", "followforfollow", "discountcode"]
_QUERY = "greatbarrierreef"


def fixture_jsonl(n_posts: int = 200, seed: int = 2019) -> str:
    """JSONL text of the demo corpus used by the end-to-end golden tests.

    ``n_posts`` distinct posts followed by two re-exported duplicate rows.
    """
    rng = random.Random(seed)
    start = datetime(2019, 6, 1, tzinfo=timezone.utc)
    names = sorted(_THEMES)
    bot_tags = ["greatbarrierreef", "cairns", "reef", "tour", "booknow"]
    records = []
    for i in range(n_posts):
        roll = rng.random()
        platform = "instagram" if rng.random() < 0.7 else "twitter"
        if roll < 0.06:
            tags = [rng.choice(["#GreatBarrierReef", "greatbarrierreef"])] + rng.sample(_ADS, 2)
            tags += rng.sample(_THEMES["travel"], 2)
        elif roll < 0.12:
            tags = list(bot_tags)
        else:
            main = rng.choice(names)
            tags = rng.sample(_THEMES[main], rng.randint(3, 7))
            if rng.random() < 0.5:
                other = rng.choice([t for t in names if t != main])
                tags.append(rng.choice(_THEMES[other]))
            if rng.random() < 0.85:
                tags.insert(0, rng.choice(["greatbarrierreef", "#GreatBarrierReef", "GreatBarrierReef"]))
            else:
                tags.insert(0, "granbarreradecoral")
        ts = start + timedelta(minutes=37 * i)
        records.append({
            "id": f"p{i:04d}",
            "platform": platform,
            "timestamp": ts.isoformat().replace("+00:00", "Z"),
            "text": " ".join("#" + t.lstrip("#") for t in tags),
            "hashtags": tags,
        })
    records.append(dict(records[3]))
    records.append(dict(records[10]))
    return "".join(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n" for r in records)


FIXTURE_BLOCKLIST = "// advertisement tags\n#sale\ngiveaway\nfollowforfollow\ndiscountcode\n"
FIXTURE_TRANSLATIONS = (
    "// raw<TAB>english\n"
    "buceo\tdiving\n"
    "playa\tbeach\n"
    "granbarreradecoral\tgreatbarrierreef\n"
)
