"""vrgrasp: deterministic virtual-hand grasping simulation and evaluation.

A headless engine that closes an articulated virtual hand onto triangle
meshes, decides grab/release from trigger-volume contacts, measures the
visual plausibility of each grasp as millimetre distances between finger
surfaces and the object, and scores questionnaire-based user studies.
"""

__version__ = "0.1.0"
