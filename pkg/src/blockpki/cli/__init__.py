"""Command-line interface: ``blockpki issue|verify|attack|bench|chain``."""
