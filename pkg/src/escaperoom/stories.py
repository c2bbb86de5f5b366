"""Background stories for generated games.

Each game gets one story matching its room style.  The full text is the
debriefing ground truth; sentence fragments are spliced into the notes the
player can read, so the story is recoverable from collected clues.
"""

from __future__ import annotations

import random
from dataclasses import dataclass


@dataclass(frozen=True)
class StoryTemplate:
    style: str
    title: str
    text: str


STORIES: tuple[StoryTemplate, ...] = (
    StoryTemplate(
        "living_room",
        "the_collector",
        "This living room belongs to a reclusive collector of locked things. "
        "Every guest is challenged to earn the way out by thinking like the host. "
        "The collector hides small clues in plain sight and rewards careful eyes. "
        "Whoever leaves the room proves worthy of the collection's secret.",
    ),
    StoryTemplate(
        "living_room",
        "the_inheritance",
        "An eccentric aunt left her estate to whichever relative could escape her parlor. "
        "She believed puzzles reveal character better than any will. "
        "Her notes are scattered where she used to read in the evenings. "
        "The door opens only for the one who follows her trail to the end.",
    ),
    StoryTemplate(
        "kitchen",
        "the_recipe",
        "A famous chef sealed this kitchen to protect a stolen recipe. "
        "The chef trusted no safe, only riddles layered like pastry. "
        "Clues are tucked between the pots and the pantry shelves. "
        "Only someone who reads every scrap of paper will taste freedom.",
    ),
    StoryTemplate(
        "kitchen",
        "the_midnight_cook",
        "The midnight cook locked the kitchen after a secret ingredient went missing. "
        "Suspicion fell on everyone who ever ate here. "
        "The cook wrote down what happened and hid the pages near the stove. "
        "Whoever pieces the pages together may leave through the service door.",
    ),
    StoryTemplate(
        "bathroom",
        "the_plumber_vault",
        "A paranoid plumber turned this bathroom into a private vault. "
        "Valuables were never kept in banks, only behind porcelain and tile. "
        "The plumber's memory failed, so hints were written on waterproof paper. "
        "The way out is reserved for whoever reconstructs the hiding scheme.",
    ),
    StoryTemplate(
        "bathroom",
        "the_lighthouse_keeper",
        "A retired lighthouse keeper rebuilt this washroom to feel like the old tower. "
        "The keeper hid the harbor logbook here after the last storm. "
        "Scraps of the log drift around the room like flotsam. "
        "Reading them in order unlocks the keeper's final signal and the door.",
    ),
    StoryTemplate(
        "bedroom",
        "the_dreamer",
        "A lucid dreamer built this bedroom to test whether guests can wake themselves. "
        "Everything here is a prop in a rehearsed dream. "
        "Notes left on the furniture describe how the dream is supposed to end. "
        "Escaping the room means finishing the dream the way the dreamer wrote it.",
    ),
    StoryTemplate(
        "bedroom",
        "the_heir_asleep",
        "The heir of a shipping fortune slept here guarded by locks and riddles. "
        "Advisors feared kidnappers, so the room opens only from within the puzzle. "
        "The heir's diary pages hold the combination to the night box. "
        "Whoever restores the diary's order walks out before dawn.",
    ),
)


def pick_story(style: str, rng: random.Random) -> StoryTemplate:
    pool = [s for s in STORIES if s.style == style]
    if not pool:
        raise ValueError(f"no stories for style {style!r}")
    return rng.choice(pool)


def fragments(story: StoryTemplate) -> list[str]:
    """Sentence fragments carried by the notes, in story order."""
    parts = [p.strip() for p in story.text.split(". ") if p.strip()]
    return [p if p.endswith(".") else p + "." for p in parts]
