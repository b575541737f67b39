#!/usr/bin/env python3
"""Regenerate data/fixtures/: a small deterministic corpus for the CLI and tests."""

import json
import math
import pathlib
import random

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "fixtures"

CATEGORIES = ["travel", "fitness", "finance", "cooking", "career"]
INDUSTRIES = ["hospitality", "sportswear", "banking", "kitchenware", "education"]

QUERY_STEMS = {
    "travel": ["How do I plan a week in Lisbon on a budget", "What should I pack for a rainy hiking trip",
               "Is it worth taking night trains across Europe", "How early should I book flights for summer",
               "What are quiet beach towns in southern Italy", "How do I avoid jet lag on long flights",
               "What documents do I need for a road trip abroad", "How can I travel with only a carry-on",
               "Which travel insurance covers cancelled flights", "How do I find cheap places to stay in Tokyo"],
    "fitness": ["How many rest days do beginners need", "What is a good first marathon plan",
                "How do I fix knee pain when running", "Is strength training useful for cyclists",
                "How do I build a home workout routine", "What should I eat before a morning run",
                "How do I stay motivated to exercise in winter", "Are standing desks good for posture",
                "How can I improve my sleep after late workouts", "What stretches help a stiff lower back"],
    "finance": ["How do I start an emergency fund", "Should I pay off debt or invest first",
                "What is a sensible monthly budget split", "How does compound interest really work",
                "How do I save for a house deposit", "Is it smart to have more than one bank account",
                "How do I lower my monthly bills", "What happens to savings during inflation",
                "How can freelancers plan for taxes", "How do I teach my kids about money"],
    "cooking": ["How do I keep a cast iron pan from rusting", "What is an easy weeknight pasta",
                "How do I sharpen kitchen knives safely", "Why does my bread come out dense",
                "How do I meal prep for a busy week", "What spices should every kitchen have",
                "How long can cooked rice stay in the fridge", "How do I make a simple vegetable stock",
                "What is the best way to roast vegetables", "How do I cook fish without it sticking"],
    "career": ["How do I prepare for a job interview", "Should I learn to code at thirty",
               "How can I ask for a raise", "What makes a strong resume summary",
               "How do I switch careers without a degree", "How do I handle a difficult manager",
               "Is an online certificate worth it", "How do I build a network from scratch",
               "How can I stay focused when working from home", "What should I learn to get promoted"],
}

AD_COPY = {
    "hospitality": ["Boutique stays in walkable old towns with free breakfast and late checkout",
                    "Hostels with private rooms and shared kitchens across forty cities",
                    "Seaside guesthouses run by locals who know every quiet cove",
                    "Flexible hotel bookings you can cancel until the day before arrival",
                    "Mountain lodges with drying rooms, maps and hot soup after the trail",
                    "City apartments with weekly rates and a host on call",
                    "Overnight sleeper cabins with clean linens and a morning coffee",
                    "Airport hotels with nap rooms and showers by the hour",
                    "Family suites with kitchenettes near the old harbour",
                    "Countryside farm stays with bikes included"],
    "sportswear": ["Running shoes with a wide toe box and cushioning that lasts five hundred miles",
                   "Thermal layers that wick sweat on cold morning runs",
                   "Compression sleeves that support tired knees after long efforts",
                   "Lightweight cycling jerseys with deep rear pockets",
                   "Yoga mats with a grip that holds on humid days",
                   "Adjustable dumbbells that replace a rack in a small flat",
                   "Trail socks that stop blisters on steep descents",
                   "Reflective jackets for running after dark",
                   "Recovery sandals shaped for sore arches",
                   "Breathable training tees made from recycled bottles"],
    "banking": ["A savings account that rounds up every purchase into your goal",
                "Zero fee transfers between your own accounts, any time",
                "A budgeting app that sorts spending into clear categories",
                "High interest savings with no lock-in period",
                "A joint account built for couples who split bills",
                "Tax pots that set aside a share of every freelance payment",
                "Kids cards with spending limits parents control",
                "Mortgage planning tools that show your deposit timeline",
                "Instant alerts when a subscription renews",
                "Inflation linked savings bonds with monthly interest"],
    "kitchenware": ["Pre-seasoned cast iron skillets that go from stove to oven",
                    "Whetstone sets with an angle guide for beginners",
                    "Glass meal prep containers that stack and seal tight",
                    "Dutch ovens for crusty loaves at home",
                    "Spice racks with refill jars for thirty essentials",
                    "Non-stick fish spatulas with thin flexible edges",
                    "Stock pots with a pasta insert and a glass lid",
                    "Sheet pans that never warp in a hot oven",
                    "Rice cookers with a keep-warm timer",
                    "Knife blocks that keep edges sharp"],
    "education": ["Interview coaching sessions with hiring managers",
                  "Evening coding bootcamps for career changers",
                  "Negotiation workshops that rehearse the raise conversation",
                  "Resume reviews by recruiters within forty-eight hours",
                  "Online certificates recognised by major employers",
                  "Leadership courses for first time managers",
                  "Networking events with mentors in your field",
                  "Focus planners and deep work courses for remote staff",
                  "Short courses that map skills to promotion criteria",
                  "Portfolio classes for self-taught designers"],
}

TRANSCRIPTS = [
    ("travel", "hospitality", "Today's video is sponsored by a booking service I use for every trip. I landed late in Porto and the host left the keys in a lockbox. Here is how I plan routes so the first night is never stressful."),
    ("fitness", "sportswear", "This episode is brought to you by a shoe brand I have run in for two seasons. My knee pain eased once I changed my cadence and my shoes. Let me show you the drills I do before every long run."),
    ("finance", "banking", "Thanks to our sponsor, a savings app that rounds up purchases. I paid off my card last year by automating small transfers. Here is the exact budget split I use each month."),
    ("cooking", "kitchenware", "This recipe is sponsored by a cookware maker whose skillet I have used for years. A hot pan and dry fish skin are the whole secret. Watch how long I wait before the first flip."),
    ("career", "education", "Today's sponsor runs interview coaching with real hiring managers. I failed three interviews before I learned to tell a short story about impact. Here is the structure I use now."),
    ("travel", "hospitality", "A quick word from the hostel chain that hosted us this month. We crossed four countries with only carry-on bags. Here is the packing list that made it possible."),
    ("fitness", "sportswear", "This workout is supported by a brand that makes adjustable dumbbells. You do not need a gym to build strength at home. Follow along with the circuit on screen."),
    ("finance", "banking", "Our sponsor helps freelancers set aside tax automatically. I used to panic every spring when the bill arrived. Now a share of each invoice moves to a separate pot."),
    ("cooking", "kitchenware", "Thanks to the glass container company for sponsoring meal prep week. Five lunches, one hour, and no soggy rice. Here is the order I cook things in."),
    ("career", "education", "This video is sponsored by an evening coding bootcamp. I switched from retail to software at thirty one. Here is what I wish I had known in month one."),
]


def unit(v):
    n = math.sqrt(sum(x * x for x in v))
    return [round(x / n, 6) for x in v]


def main():
    rng = random.Random(20240607)
    OUT.mkdir(parents=True, exist_ok=True)
    dim = 16
    centers = {c: [rng.gauss(0, 1) for _ in range(dim)] for c in CATEGORIES}
    ind_of = dict(zip(CATEGORIES, INDUSTRIES))

    queries, qemb, ads, aemb = [], [], [], []
    for c in CATEGORIES:
        for i, text in enumerate(QUERY_STEMS[c]):
            qid = f"q-{c}-{i:02d}"
            queries.append({"query_id": qid, "query": text + "?", "category": c})
            qemb.append({"id": qid, "vec": unit([x + rng.gauss(0, 0.6) for x in centers[c]])})
        ind = ind_of[c]
        for i, copy in enumerate(AD_COPY[ind]):
            aid = f"ad-{ind}-{i:02d}"
            ads.append({"ad_id": aid, "ad_name": f"{ind.capitalize()} Co {i + 1}", "industry": ind,
                        "copy": copy, "keywords": copy.lower().split()[:3]})
            aemb.append({"id": aid, "vec": unit([x + rng.gauss(0, 0.9) for x in centers[c]])})

    transcripts = []
    for i, (cat, ind, text) in enumerate(TRANSCRIPTS):
        j = rng.randrange(10)
        transcripts.append({"transcript_id": f"t{i:02d}", "text": text, "category": cat,
                            "ad": {k: ads[INDUSTRIES.index(ind) * 10 + j][k]
                                   for k in ("ad_id", "ad_name", "industry", "copy", "keywords")}})

    bdim = 24
    bcenters = [[rng.gauss(0, 3) for _ in range(bdim)] for _ in range(4)]
    bridges = []
    for i in range(96):
        c = bcenters[i % 4]
        bridges.append({"id": f"b{i:03d}", "vec": [round(x + rng.gauss(0, 0.5), 6) for x in c]})

    def dump(name, rows):
        with open(OUT / name, "w", encoding="utf-8") as f:
            for r in rows:
                f.write(json.dumps(r, sort_keys=True) + "\n")

    dump("queries.jsonl", queries)
    dump("ads.jsonl", ads)
    dump("query_embeddings.jsonl", qemb)
    dump("ad_embeddings.jsonl", aemb)
    dump("transcripts.jsonl", transcripts)
    dump("bridge_embeddings.jsonl", bridges)

    config = {
        "queries": "queries.jsonl",
        "ads": "ads.jsonl",
        "query_embeddings": "query_embeddings.jsonl",
        "ad_embeddings": "ad_embeddings.jsonl",
        "bridge_embeddings": "bridge_embeddings.jsonl",
        "transcripts": "transcripts.jsonl",
        "out_dir": "pipeline_out",
        "seed": 7,
        "templates": 120,
        "discordant_frac": 0.5,
        "tolerance": {"max_abs": 0.8, "mean_abs": 0.5},
        "retry_budget": 8,
        "folds": 5,
        "concurrency": 4,
        "client": "mock",
        "anchors": 60,
        "cluster": {"variance": 0.85, "reduce_dim": 8, "k_min": 2, "k_max": 8},
        "top_k": 20,
    }
    with open(OUT / "pipeline.json", "w", encoding="utf-8") as f:
        json.dump(config, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
