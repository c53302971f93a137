from .models import AdversaryConfig, Challenge, SimulatedDomain, WELL_KNOWN_PREFIX
from .service import ValidationService

__all__ = ["AdversaryConfig", "Challenge", "SimulatedDomain", "ValidationService", "WELL_KNOWN_PREFIX"]
