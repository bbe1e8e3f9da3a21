"""Desk-scale Bell-test laboratory: operator identities, CHSH runs on quantum
and hidden-variable sources, the time-order term, and Ou-Mandel coincidences."""

__version__ = "0.1.0"
