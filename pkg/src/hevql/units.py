"""Unit conversion factors and physical constants (SI internally)."""

MPH_TO_MPS = 0.44704          # exact, by definition of the international mile
MPS_TO_MPH = 1.0 / MPH_TO_MPS
RPM_TO_RADS = 0.10471975511965977  # pi / 30
RADS_TO_RPM = 1.0 / RPM_TO_RADS
MILE_M = 1609.344              # m per mile, exact
GALLON_L = 3.785411784         # L per US gallon, exact
GRAVITY = 9.81                 # m/s^2

# Gasoline properties used for fuel-economy bookkeeping.
FUEL_DENSITY_KG_PER_L = 0.745


def mph(v_mps: float) -> float:
    return v_mps * MPS_TO_MPH


def mps(v_mph: float) -> float:
    return v_mph * MPH_TO_MPS
