"""Regenerate the scripted dialogues used by the bundled Table-6 style matrix.

    python scripts/build_dialogues.py

Writes ``src/agilesim/data/dialogues/sim{1..6}.script.json``. Each file maps
agent name -> ordered replies for the scripted backend.
"""

from __future__ import annotations

import itertools
import json
from pathlib import Path

PM = "Product Management Agent—Alex"
ARCH = "System Architect—John"
DEV = "Development Team—Dana"

OUT = Path(__file__).resolve().parents[1] / "src" / "agilesim" / "data" / "dialogues"

SIM1 = {
    PM: [
        "Architect, before planning starts I want a shared vision: a web shop where returning customers pay in two clicks.",
        "Good. My top features are checkout with saved cards, customer accounts and a daily sales dashboard.",
        "Thanks, that is clear. Which of those features carries the biggest risk for the increment?",
        "Then we keep the dashboard but scope it to yesterday's sales until the stream is ready.",
        "Agreed. I will bring the vision, the feature list and your constraints to the planning event.",
    ],
    ARCH: [
        "The vision works for me. The main constraint is the payment provider, which must hold the card data.",
        "Checkout and accounts fit one increment. The dashboard depends on the inventory export, which only runs nightly.",
        "The dashboard. Live numbers would need a change to the legacy inventory system, and that team is booked.",
        "That keeps the risk low. I will write up the interface contracts for the payment and user services.",
        "I will also note the nightly export as a constraint so nobody promises real time data.",
    ],
}

SIM2 = {
    PM: [
        'Before we commit I want to check the compliance side. <<tool:search {"q": "payment api compliance"}>>',
        "The search says tokenising at the provider keeps most services out of scope. Here is the road map: accounts first, then checkout, then analytics.",
        "The PI objectives are: launch checkout with saved cards, migrate existing customers, and ship a first sales dashboard.",
        "Good catch. The migration has a dependency on the support team, so I will add it to the program board.",
        "Let us ROAM the risks now: provider outage is owned by you, migration slip is mitigated by a dry run.",
        "Thanks, I am confident this plan is ready for the confidence vote.",
    ],
    ARCH: [
        "The road map order makes sense because checkout needs the user service in place.",
        "Those objectives are realistic. Migration is the one I am least confident about.",
        "Yes, and the analytics stream depends on the event schema we have not agreed yet.",
        "I own the outage risk and will add a fallback payment page. The schema dependency I can resolve this week.",
        "Ready from the architecture side. I vote four out of five.",
    ],
}

_SIM3_TOPICS = [
    "the checkout story",
    "the saved cards story",
    "the login story",
    "the password reset story",
    "the order history story",
    "the refund story",
    "the dashboard story",
    "the export job",
    "the event stream",
    "the fraud check",
    "the email receipts",
    "the address book",
    "the admin console",
]
_SIM3_PM = [
    "What is the status of {t}?",
    "Is anything blocking {t} this iteration?",
]
_SIM3_ARCH = [
    "{T} is in progress and the tests are green on the pipeline.",
    "{T} waits on the provider sandbox; I expect it done tomorrow.",
]


def _sim3() -> dict[str, list[str]]:
    pm, arch = [], []
    for t, (p, a) in zip(_SIM3_TOPICS * 2, itertools.cycle(zip(_SIM3_PM, _SIM3_ARCH))):
        pm.append(p.format(t=t))
        arch.append(a.format(T=t[0].upper() + t[1:]))
    return {PM: pm[:25], ARCH: arch[:25]}


SIM4 = {
    PM: [
        "Looking back at the increment, we met two of our three objectives.",
        "The migration slipped by a week. I want a root cause before we blame anyone.",
        "So the real problem was the missing test data for old accounts.",
        "Then the first improvement item is a shared set of anonymised customer records.",
        "Let us vote on which problem to fix first.",
    ],
    ARCH: [
        "The checkout numbers look good: conversion is up and error rates stayed low.",
        "The export job failed twice on large accounts and we found it late.",
        "Yes, and our staging data never had accounts older than a year.",
        "I can build that generator in the next iteration.",
        "My vote goes to the test data problem.",
    ],
}

SIM5 = {
    PM: [
        "This is the innovation and planning iteration. What spikes are worth our time?",
        "A spike on live inventory would unblock the real time dashboard. What else?",
        "Good, pay down some technical debt in the user service as well.",
        "I will also book a training session on the new payment provider dashboard.",
        "Great, I will put both spikes on the board for the next planning event.",
    ],
    ARCH: [
        "A spike on reading inventory changes from the database log instead of the nightly export.",
        "A second spike on replacing the hand written retry code with the provider SDK.",
        "Agreed, the session handling there is fragile.",
        "That helps support too, they asked for it.",
        "I will prepare short write ups for each spike.",
    ],
}

SIM6 = {
    PM: [
        "Welcome to the system demo. Today we show the integrated checkout, accounts and dashboard.",
        "Development team, please walk everyone through a purchase with a saved card.",
        "Thanks. Stakeholders asked whether refunds will appear on the dashboard.",
        "Then the next steps are the refund events and a feedback session with support.",
    ],
    ARCH: [
        "All three services run together on staging against the provider sandbox.",
        "Refund events are not on the stream yet; that is a small schema change.",
        "I will have the schema change ready for the next iteration.",
    ],
    DEV: [
        "Here is the purchase: login, add to cart, pay with the saved card, and the receipt email arrives.",
        "We found one bug in the receipt template but it is fixed and the tests pass.",
        "We can pick up the refund events once the schema change lands.",
    ],
}


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    sims = {1: SIM1, 2: SIM2, 3: _sim3(), 4: SIM4, 5: SIM5, 6: SIM6}
    for sim_id, script in sims.items():
        path = OUT / f"sim{sim_id}.script.json"
        path.write_text(json.dumps(script, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        print(path)


if __name__ == "__main__":
    main()
