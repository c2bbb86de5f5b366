"""Frozen protocol text: system/step prompts, evaluator prompts, feedback templates.

These strings are the wire protocol.  Do not edit them casually: golden-file
tests pin every template, and replay checking depends on feedback strings
being byte-stable.  Slots use {name} markers filled via str.replace, never
str.format (the JSON blocks contain literal braces).
"""

from __future__ import annotations

ACTION_FORMAT_BLOCK = """{
    "move_forward": float,
    "rotate_right": float,
    "rotate_down": float,
    "jump": bool,
    "look_at": [x: float, y: float],
    "grab": bool,
    "interactions": {
        "use_item_id": str,
        "input": str
    },
    "read": str,
    "rationale": str
}"""

SYSTEM_PROMPT = (
    """You find yourself locked inside a room, and your ultimate goal is to escape the room. i.e. the room escape game.

You can explore the room, interact with objects, inspect items, and resolve puzzles. If you find doors locked or uninteractable, you probably need to search for keys or passwords to unlock the door when interacting with the environment. You can adopt the following actions to explore the room and interact with objects:
- move_forward: float, ranged between [-10, 10]. This is the number of meters you want to move forward (negative value means moving backward).
- rotate_right: float, ranged between [-180, 180]. This is the number of degrees you want to turn right (negative value means turn left).
- rotate_down: float, ranged between [-90, 90]. This is the angle you want to adjust your view vertically. Positive value means looking downward, while a negative value means looking upward. Angle 0 means looking straight ahead.
- jump: bool, whether you want to jump (can be used together with moving forward), e.g., True represents the action "to jump".
- look_at: list[x: foat, y: float], the range of x and y is [0, 1]. This parameter is the coordinates of the point in the image you want to look at. For reference, the coordinates of the upper left corner of the scene are (0, 0) and the coordinates of the lower right corner are (1, 1). Also to mention that there are on clues on the ceiling.
- grab: bool, whether you require to interact with the object located exactly at the center of the scene (marked by a red dot). e.g., to grab the key or to interact with (or open) a box at the center of the scene, set grab=True. The red dot assists in locating the object you require to interact with. You might need to adjust the view or move closer to ensure the red dot is on your target object, through the rotate_right, rotate_down, and move_forward actions. To successfully grab an object, you should center the object via the red dot and be in a certain distance to it. If the grabbing fails, try move closer towards the object. If it fails multiple times at the same position, you should be aware that not all objects are interactable, do not get stucked in uninteractable position.
- interactions : dict:{"use_item_id": str, this is the item_id you require to view or use (when used together with grab=True, it means to use this item to interact with the target object you want to grab, e.g. using item_id of the key to open the door in the scene), "input": str, this is the message you want to input when interacting with the center object}.
- read: str, this is the item_id that you want to get detailed information from your bag.
- rationale: str, represents the rationale of your action. This should explain your decision-making process and help the agent understand your thinking process.

You need to return data in the following format of JSON_string to interact with the scene:
"""
    + ACTION_FORMAT_BLOCK
    + """

All of the above operations are optional. If no value is passed in, the interactive operation will not be performed.

You must follow the above instructions and don't say anything else except for the JSON_string of operations."""
)

STEP_PROMPT_TEMPLATE = (
    """{interaction_result}
===
The items in your bag usable include:
{bag_desc}
===
Please determine the next action(s) that could help you observe the room or obtain useful tools or clues.
If you find yourself stuck in a corner, try turn around by passing rotate_right.
You need to return data in the following format of JSON_string to interact with the scene and don't say anything else:
"""
    + ACTION_FORMAT_BLOCK
)

CONSISTENCY_PROMPT_TEMPLATE = """You are a reasoning consistency evaluator for a multimodal agent benchmark. Your task is to determine whether the agent's intention (described in the "rationale") matches the actual interaction result (described in the "response").

Specifically, you are given:
- The agent's rationale for why it attempted an interaction, describing its goal or belief about the current environment.
- The response from the environment after the interaction, which includes the actual result (e.g., what item was interacted with and what was obtained).

Your goal is to determine whether the object the agent intended to interact with matches the object that was actually interacted with according to the response.

If the agent tried to interact with object A (e.g., a microwave), but the response shows interaction with object B (e.g., a box), and B was not the intended target, this is considered an inconsistent interaction (i.e., accidental success or misaligned action).

Special Case: If the response is "Escaped successfully!", you should check whether the agent's rationale explicitly or implicitly indicates the intention to escape (e.g., trying to open the door to leave). If not, treat it as inconsistent.

You must give your feedback in the following JSON-string format and DON'T say anything else:
{
    "Consistency": 1 | 0
}

Where:
- 1 means the rationale and interaction are consistent (i.e., aligned).
- 0 means the interaction appears to be accidental, mismatched, or unintended.

Respond only with Consistency: 1 or Consistency: 0.

---

Example 1:
rationale: Moving closer to the microwave to try interacting with it one last time using '1264'. If this doesn't work, I'll need to explore other areas.
response: You used the correct password to unlock the box... You did not interact with any objects in the last step.
Expected output: Consistency: 0

Example 2:
rationale: I’ll try using the key I just picked up on the door. Let’s see if I can escape now.
response: Escaped successfully!
Expected output: Consistency: 1

Example 3:
rationale: I want to check if the small box has any useful items inside.
response: You opened the box and found a screwdriver.
Expected output: Consistency: 1

Please score the following interaction:
rationale: {rationale}
response(s): {response}"""

DEBRIEF_INTRO = """You have successfully escaped the room. Now, reconstruct the entire story based on the items you discovered during the game and the overall environment you observed. Follow the steps below to guide your recollection and piece together the full narrative."""

DEBRIEF_STEPS = (
    """Step 1: Describe the room environment
"Begin by describing the room where you started. What did the room look like? What was the overall atmosphere? Were there any notable features, such as furniture, lighting, or strange objects? Include sensory details like smells, sounds, and the arrangement of the room. This will help set the scene for the story.\"""",
    """Step 2: Recall the items that may contain information or clues
"Think back to the objects you found throughout the game. What items did you come across? Were any of them unusual or seemed important? These could include physical items like keys, notes, or devices, or even abstract clues like symbols or markings on the wall. Reflect on how each item might have connected to the next step in your escape.\"""",
    """Step 3: Piece together the whole story
"Now, use the information from the room description and the items you've found to piece together the full story. What was the purpose of the room? Who or what might have created the escape challenge, and why? What was the sequence of events that led you to the escape? Try to connect the dots between the environment, the clues, and the items you encountered, and reconstruct the narrative from start to finish.\"""",
)

# Version-stamped rubric for scoring a recovered story against the ground truth.
DEBRIEF_SCORING_PROMPT_V1 = """You are grading how well a recovered story matches the ground-truth background story of an escape game.
Assign a similarity score between 0 and 5, where 0 means no meaningful overlap and 5 means the recovered story faithfully reproduces the ground-truth story.

Ground-truth story:
{groundtruth}

Recovered story:
{recovered}

Respond only in the JSON format {"score": s} where s is an integer between 0 and 5, and don't say anything else."""


def fill(template: str, **slots: str) -> str:
    """Instantiate {name} slots; templates contain literal JSON braces."""
    out = template
    for name, value in slots.items():
        out = out.replace("{" + name + "}", value)
    return out


def build_step_prompt(interaction_result: str, bag_desc: str) -> str:
    return fill(STEP_PROMPT_TEMPLATE, interaction_result=interaction_result, bag_desc=bag_desc)


# ---------------------------------------------------------------------------
# feedback templates (slot grammar documented in docs/protocol.md)

FB_NO_INTERACTION = "You did not interact with any objects in the last step."
FB_ESCAPED = "Escaped successfully!"
FB_MOVE_BLOCKED = "You moved {moved} m before being blocked (you asked for {requested} m)."
FB_PICKED_UP = "You picked up {item_id} ({kind})."
FB_OBTAINED = "You obtained: {items}."
FB_UNLOCKED_WITH_KEY = "You used {key_id} to unlock the {kind}."
FB_UNLOCKED_WITH_PASSWORD = "You used the correct password to unlock the {kind}."
FB_LOCKED_NEEDS = "The {kind} is locked. You need a {requirement} to unlock it."
FB_WRONG_KEY = "{item_id} does not unlock the {kind}."
FB_WRONG_PASSWORD = "The password you entered is incorrect."
FB_ITEM_NOT_IN_BAG = "You do not have {item_id} in your bag."
FB_ALREADY_OPEN = "The {item_id} is already unlocked and empty."
FB_NEXT_ROOM = "You unlocked the door and stepped into the next room."
FB_DOOR_LOCKED = "The door is locked."
FB_READ = "{item_id}: {detail}"
FB_READ_NOT_IN_BAG = "{item_id} is not in your bag."
FB_PARSE_ERROR = "Invalid action: {reason}"

BAG_EMPTY = "(empty)"
