# schemas of the problem and certificate documents used by torictriv
# plus the default resource limits

FORMAT_VERSION = 1

DEFAULTS = {
    # lattice points enumerated by Gordon-style box searches
    "budget": 10**6,
    # rank of the graded free module carrying the idempotent
    "max_rank": 8,
    # lattice rank accepted by the trivializer
    "max_ambient": 4,
    # lattice rank accepted by cone dualization
    "max_cone_ambient": 6,
}

COEFFICIENT_KINDS = ("QQ", "ZZ", "GF")

# top-level keys of a problem file; True marks the required ones
problem_keys = {
    "version": True,
    "coefficients": True,
    "rank": True,
    "cone": True,
    "group": True,
    "psi": True,
    "module": False,
    "name": False,
}

cone_keys = ("rays", "inequalities")

module_keys = ("free", "weights", "idempotent")

certificate_keys = (
    "version",
    "problem_hash",
    "group",
    "source_weights",
    "target_weights",
    "iso_entries",
    "inverse_entries",
    "trace",
    "k0_class",
)

# column layouts of the tabular CLI reports
faces_report_columns = ["face", "dim", "codim", "rays", "zero_set", "span_basis"]

invariants_report_columns = ["generator", "weight", "element"]

k0_report_columns = ["weight", "multiplicity"]
