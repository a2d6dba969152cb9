"""Plant-in-the-loop LSPI tuning of hip-exoskeleton assistive torque timing."""

__version__ = "0.1.0"
