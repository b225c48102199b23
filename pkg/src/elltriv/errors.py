class ElltrivError(Exception):
    pass


class StripError(ElltrivError, ValueError):
    pass


class PoleError(ElltrivError, ArithmeticError):
    pass


class ContourError(ElltrivError, ArithmeticError):
    pass


class IndeterminateError(ElltrivError, ArithmeticError):
    pass


class ConstructionError(ElltrivError, RuntimeError):
    pass
