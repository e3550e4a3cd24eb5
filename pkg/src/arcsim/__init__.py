"""Desk-scale distributed simulator for a screw-propelled serpentine robot.

Subpackages: kinematics (DH chain), actuation (transmissions, friction,
encoders), control (two-rate per-module loops), locomotion (screw-ground
contact and body twist), bus (TCP pub/sub), harness (experiments, power,
logging), service (FastAPI gateway and teleop WebSocket).
"""

__version__ = "0.1.0"
