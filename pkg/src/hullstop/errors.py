class InvariantViolation(RuntimeError):
    """A structural guarantee of the simulation was broken at runtime.

    Raised for breaches that should be impossible under valid inputs, for
    example a nonpositive push-sum denominator or disagreeing halt flags at
    a window boundary. Distinct from ValueError, which flags bad inputs.
    """
