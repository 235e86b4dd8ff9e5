"""jt-cqed - Jahn-Teller quantum simulation with a qubit and two coupled resonators."""

__version__ = "0.1.0"
__author__ = "Web3Vanguard"
