//! Every claim the suite checks, and every check with its claim and pinned
//! tolerance.

/// One mathematical claim covered by the suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Anchor {
    pub key: &'static str,
    pub claim: &'static str,
}

pub const ANCHORS: &[Anchor] = &[
    Anchor { key: "fock.occupation", claim: "states are occupation vectors |n_{-s}, ..., n_s>" },
    Anchor { key: "fock.basis", claim: "occupation vectors with total <= n_max form a complete basis" },
    Anchor { key: "operator.ccr", claim: "[a_mu, a_nu^dag] = delta_mu_nu" },
    Anchor { key: "operator.creation", claim: "a^dag|n> = sqrt(n+1)|n+1>, a|n+1> = sqrt(n+1)|n>" },
    Anchor { key: "su2.jordan-map", claim: "X -> sum x_ij a_i^dag a_j preserves commutators" },
    Anchor { key: "su2.generators", claim: "J_z, J_+, J_-, N realize su(2) with the spin-s irrep on one particle" },
    Anchor { key: "casimir.jhat", claim: "jhat = (sqrt(1 + 4 J^2) - 1)/2 has the labels j as eigenvalues" },
    Anchor { key: "casimir.kernel", claim: "classification can be done inside the J_z kernel" },
    Anchor { key: "ladder.sigma-degree", claim: "sigma_k is a polynomial in jhat of degree s - k" },
    Anchor { key: "ladder.alpha-tridiagonal", claim: "the closure matrices of both families are tridiagonal" },
    Anchor { key: "ladder.sigma-recurrence", claim: "sigma_k follow recurrently from sigma_s" },
    Anchor { key: "ladder.rlo", claim: "[H, p^dag] = p^dag P defines a right ladder operator" },
    Anchor { key: "ladder.power", claim: "[H^n, p^dag] = p^dag((H + P)^n - H^n)" },
    Anchor { key: "ladder.compose", claim: "p^dag A is a right ladder when [H + P, A] = 0" },
    Anchor { key: "ladder.closure", claim: "[J^2, T_k] closes on the family with J_z replaced" },
    Anchor { key: "ladder.right-functions", claim: "det(A - theta(theta + 2 jhat + 1)) = 0 for theta = -s..s" },
    Anchor { key: "ladder.back-substitution", claim: "sigma_{k-1} is expressed through sigma_k and sigma_{k+1}" },
    Anchor { key: "families.p-m", claim: "p_k^dag, m_k^dag = (a_{-k}^dag J_+^k +- a_k^dag J_-^k)/prod sqrt((s+i)(s-i+1))" },
    Anchor { key: "families.p0", claim: "p_0^dag = 2 a_0^dag" },
    Anchor { key: "tau.assembly", claim: "tau_theta^dag = sum T_k sigma_k shifts j by theta" },
    Anchor { key: "tau.resolvent", claim: "tau^dag are ladders of 1/(2 jhat + 2k + 1)" },
    Anchor { key: "lattice.scheme", claim: "kernel states form an |n, j> lattice connected by tau" },
    Anchor { key: "lattice.arrows", claim: "tau_omega^dag: |n, j> -> |n+1, j+omega> with the stated annihilations" },
    Anchor { key: "deformed.generators", claim: "L_z = [tau_{-w}^dag, tau_{-w}] and L^2 deform su(2)" },
    Anchor { key: "tau.complete-set", claim: "tau^dag tau commutes with J^2, J_z and N" },
    Anchor { key: "demo.operators", claim: "spin-1 A^dag, L_+ built from tau_{+-1}^dag" },
    Anchor { key: "demo.canonical-basis", claim: "canonical basis by joint action of the ladders" },
    Anchor { key: "demo.tau-bar", claim: "commutator forms of the spin-1 ladders" },
];

/// A check name, the claim it tests and its tolerance; `None` marks an
/// exact (boolean) check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckSpec {
    pub name: &'static str,
    pub anchor: &'static str,
    pub tolerance: Option<f64>,
}

const fn spec(name: &'static str, anchor: &'static str, tolerance: Option<f64>) -> CheckSpec {
    CheckSpec { name, anchor, tolerance }
}

pub const CHECKS: &[CheckSpec] = &[
    spec("fock.dimension", "fock.basis", None),
    spec("fock.sector_partition", "fock.occupation", None),
    spec("operator.ccr", "operator.ccr", Some(1e-12)),
    spec("operator.creation_action", "operator.creation", Some(1e-12)),
    spec("operator.number_ladder", "ladder.rlo", Some(1e-12)),
    spec("operator.ladder_negative_control", "ladder.rlo", None),
    spec("operator.power_identity", "ladder.power", Some(1e-10)),
    spec("su2.jz_jplus", "su2.generators", Some(1e-12)),
    spec("su2.jz_jminus", "su2.generators", Some(1e-12)),
    spec("su2.jplus_jminus", "su2.generators", Some(1e-12)),
    spec("su2.n_jz", "su2.generators", Some(1e-12)),
    spec("su2.n_jpm", "su2.generators", Some(1e-12)),
    spec("su2.j2_jpm", "su2.generators", Some(1e-12)),
    spec("su2.one_particle_casimir", "su2.generators", Some(1e-12)),
    spec("su2.jordan_homomorphism", "su2.jordan-map", Some(1e-12)),
    spec("casimir.jhat_definition", "casimir.jhat", Some(1e-10)),
    spec("casimir.jhat_integer", "casimir.jhat", Some(1e-6)),
    spec("casimir.kernel_multiplicity", "casimir.kernel", None),
    spec("families.p0", "families.p0", Some(1e-12)),
    spec("families.definition", "families.p-m", Some(1e-12)),
    spec("families.number_shift", "families.p-m", Some(1e-12)),
    spec("alpha.tridiagonal", "ladder.alpha-tridiagonal", None),
    spec("alpha.closure", "ladder.closure", Some(1e-8)),
    spec("alpha.extraction", "ladder.closure", Some(1e-8)),
    spec("alpha.full_closure", "ladder.closure", Some(1e-8)),
    spec("symbolic.right_function", "ladder.right-functions", None),
    spec("symbolic.negative_control", "ladder.right-functions", None),
    spec("symbolic.sigma_consistency", "ladder.sigma-recurrence", None),
    spec("symbolic.sigma_degree", "ladder.sigma-degree", None),
    spec("symbolic.sigma_closed_form", "ladder.back-substitution", None),
    spec("symbolic.jpoly_roundtrip", "ladder.sigma-recurrence", None),
    spec("tau.ladder", "tau.assembly", Some(1e-8)),
    spec("tau.jhat_shift", "tau.assembly", Some(1e-8)),
    spec("tau.power_identity", "ladder.power", Some(1e-8)),
    spec("tau.compose_number", "ladder.compose", Some(1e-8)),
    spec("tau.compose_resolvent", "ladder.compose", Some(1e-8)),
    spec("resolvent.left", "tau.resolvent", Some(1e-8)),
    spec("resolvent.right", "tau.resolvent", Some(1e-8)),
    spec("lattice.scheme", "lattice.scheme", None),
    spec("lattice.irrep_dimensions", "lattice.scheme", None),
    spec("lattice.claim", "lattice.arrows", None),
    spec("lattice.tau0_preserves_j", "lattice.arrows", None),
    spec("lattice.multiplicity_oracle", "casimir.kernel", None),
    spec("deformed.hermiticity", "deformed.generators", Some(1e-10)),
    spec("deformed.commutators", "deformed.generators", Some(1e-8)),
    spec("deformed.residue_classes", "deformed.generators", None),
    spec("complete_set.commutators", "tau.complete-set", Some(1e-8)),
    spec("complete_set.separation", "tau.complete-set", None),
    spec("demo.families", "families.p0", Some(1e-12)),
    spec("demo.conventional_match", "demo.operators", Some(1e-10)),
    spec("demo.weyl", "demo.operators", Some(1e-8)),
    spec("demo.adag_a_eigen", "demo.operators", Some(1e-8)),
    spec("demo.lz_eigen", "demo.operators", Some(1e-8)),
    spec("demo.l2_eigen", "demo.operators", Some(1e-8)),
    spec("demo.canonical_basis", "demo.canonical-basis", Some(1e-8)),
    spec("demo.double_commutator", "demo.tau-bar", Some(1e-8)),
    spec("demo.tau_bar_ladder", "demo.tau-bar", Some(1e-8)),
    spec("demo.tau_bar_collinear", "demo.tau-bar", Some(1e-8)),
];

pub fn check_spec(name: &str) -> Option<&'static CheckSpec> {
    CHECKS.iter().find(|c| c.name == name)
}

pub fn anchor(key: &str) -> Option<&'static Anchor> {
    ANCHORS.iter().find(|a| a.key == key)
}

/// Anchors without a registered check, and registered checks pointing at
/// an unknown anchor.
pub fn audit() -> (Vec<&'static str>, Vec<&'static str>) {
    let uncovered = ANCHORS
        .iter()
        .filter(|a| !CHECKS.iter().any(|c| c.anchor == a.key))
        .map(|a| a.key)
        .collect();
    let dangling = CHECKS
        .iter()
        .filter(|c| anchor(c.anchor).is_none())
        .map(|c| c.name)
        .collect();
    (uncovered, dangling)
}
