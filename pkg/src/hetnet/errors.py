"""Exception hierarchy. Every error carries a short machine-readable code."""


class HetnetError(Exception):
    code = "error"

    def __init__(self, message: str, **detail):
        super().__init__(message)
        self.detail = detail

    def to_dict(self) -> dict:
        return {"code": self.code, "message": str(self), **self.detail}


class ParseError(HetnetError):
    code = "parse_error"


class SchemaError(HetnetError):
    code = "schema_error"


class InvariantError(HetnetError):
    code = "invariant_error"


class IncompleteClique(HetnetError):
    code = "incomplete_clique"

    def __init__(self, i: int, j: int, k: int):
        super().__init__(
            f"node {i} expands toward {j} and {k} but neither {j}->{k} nor {k}->{j} exists",
            b=i, targets=[j, k],
        )
        self.nodes = (i, j, k)


class InternalError(HetnetError):
    code = "internal_error"


class NotRepresentable(HetnetError):
    code = "not_representable"


class RoleConflict(HetnetError):
    code = "role_conflict"


class MissingIngredient(HetnetError):
    code = "missing_ingredient"


class CapExceeded(HetnetError):
    code = "cap_exceeded"


class InconsistentRadial(HetnetError):
    code = "inconsistent_radial"


class Timeout(HetnetError):
    code = "timeout"


class InteriorEquilibrium(HetnetError):
    code = "interior_equilibrium"


class StepUnderflow(HetnetError):
    code = "step_underflow"


class PolylineMissing(HetnetError):
    code = "polyline_missing"


class ConfigError(HetnetError):
    code = "config_error"
