//! CU on/off power rule, closed-form jammer power, and the alternating
//! filter/jammer-power optimization of one CU–D2D pair.
//!
//! For a fixed filter `w`, the pair objective as a function of the jammer
//! power `q` is
//!
//! ```text
//! chi(q) = -log2(q*delta + eps) - log2(1 + vareps / (q*zeta + kappa))
//! ```
//!
//! whose derivative has the numerator
//! `-delta*zeta^2 q^2 - 2 delta*zeta*kappa q + eps*vareps*zeta - delta*vareps*kappa - delta*kappa^2`,
//! a concave quadratic that is decreasing for `q >= 0`. `chi` is therefore
//! increasing up to the positive root (when there is one) and decreasing
//! afterwards, which is what [`optimal_jammer_power`] exploits.

use crate::algebra::sq_norm;
use crate::error::{Error, Result};
use crate::model::{ChannelSet, SystemConfig};
use crate::rates::{chi_tilde, mmse_filter, JammerChannels, LinkChannels, ReceiveFilter};

/// Relative margin below which the two sides of the power rule are a tie.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Binary CU power: `p_cap` when the BS sees the CU better than the
/// eavesdropper at the given filter and jammer power, otherwise 0.
///
/// The comparison is
/// `|w^H g_mb|^2 / ||g_me||^4 > (q |w^H h_nb|^2 + N0 ||w||^2) / (q |g_me^H h_ne|^2 + N0 ||g_me||^2)`;
/// equality switches the CU off. Sides within `TIE_TOLERANCE` (relative)
/// of each other count as equal, so rounding cannot turn a tie into a
/// transmission worth about 1e-12 bit/s/Hz. Jammer terms vanish when the link
/// has no jammer.
pub fn cu_power_rule(
    w: &ReceiveFilter,
    link: &LinkChannels<'_>,
    q: f64,
    n0: f64,
    p_cap: f64,
) -> Result<f64> {
    let wv = w.weights();
    if wv.len() != link.g_mb.len() {
        return Err(Error::DimensionMismatch {
            expected: link.g_mb.len(),
            found: wv.len(),
        });
    }
    let wn = sq_norm(wv);
    if wn == 0.0 {
        return Err(Error::ZeroVector("receive filter"));
    }
    let gn = sq_norm(link.g_me);
    let (bs_jam, eve_jam) = match link.jammer {
        Some(j) => (q * wv.dot(j.h_nb).norm_sqr(), q * link.g_me.dot(j.h_ne).norm_sqr()),
        None => (0.0, 0.0),
    };
    let lhs = wv.dot(link.g_mb).norm_sqr() / (gn * gn);
    let rhs = (bs_jam + n0 * wn) / (eve_jam + n0 * gn);
    Ok(if lhs > rhs * (1.0 + TIE_TOLERANCE) { p_cap } else { 0.0 })
}

/// Coefficients of the pair objective as a function of jammer power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JammerConstants {
    /// `|sqrt(P) w^H g_mb - 1|^2 + N0 ||w||^2`
    pub eps: f64,
    /// `|w^H h_nb|^2`
    pub delta: f64,
    /// `P ||g_me||^4`
    pub vareps: f64,
    /// `|g_me^H h_ne|^2`
    pub zeta: f64,
    /// `N0 ||g_me||^2`
    pub kappa: f64,
}

impl JammerConstants {
    /// Pair objective at jammer power `q` for the filter these constants were
    /// built from.
    pub fn chi_tilde(&self, q: f64) -> f64 {
        -(q * self.delta + self.eps).log2() - (1.0 + self.vareps / (q * self.zeta + self.kappa)).log2()
    }

    /// Numerator of `d chi / d q`; its sign is the sign of the derivative.
    pub fn derivative_numerator(&self, q: f64) -> f64 {
        let Self {
            eps,
            delta,
            vareps,
            zeta,
            kappa,
        } = *self;
        -q * q * delta * zeta * zeta - 2.0 * q * delta * zeta * kappa + eps * vareps * zeta
            - delta * vareps * kappa
            - delta * kappa * kappa
    }

    /// Discriminant `4 delta vareps zeta^2 (eps zeta - delta kappa)` of the
    /// derivative numerator.
    pub fn discriminant(&self) -> f64 {
        4.0 * self.delta * self.vareps * self.zeta * self.zeta
            * (self.eps * self.zeta - self.delta * self.kappa)
    }

    fn is_finite(&self) -> bool {
        [self.eps, self.delta, self.vareps, self.zeta, self.kappa]
            .iter()
            .all(|x| x.is_finite())
    }
}

/// Evaluates the objective coefficients for filter `w` on a link. Without a
/// jammer, `delta = zeta = 0`.
pub fn jammer_constants(w: &ReceiveFilter, link: &LinkChannels<'_>, p: f64, n0: f64) -> JammerConstants {
    let wv = w.weights();
    let gn = sq_norm(link.g_me);
    let (delta, zeta) = match link.jammer {
        Some(j) => (wv.dot(j.h_nb).norm_sqr(), link.g_me.dot(j.h_ne).norm_sqr()),
        None => (0.0, 0.0),
    };
    JammerConstants {
        eps: (wv.dot(link.g_mb) * p.sqrt() - 1.0).norm_sqr() + n0 * sq_norm(wv),
        delta,
        vareps: p * gn * gn,
        zeta,
        kappa: n0 * gn,
    }
}

/// Which case of the closed-form jammer power applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JammerBranch {
    /// Positive root strictly inside `(0, Q)`.
    Interior,
    /// Positive root at or beyond the cap.
    Cap,
    /// Nonpositive discriminant or nonpositive root: jamming never helps.
    Zero,
    /// `delta = 0`, `zeta > 0`: the jammer is invisible at the BS, so the
    /// objective is increasing in `q`.
    DegenerateFull,
    /// `zeta = 0`: the jammer is invisible at the eavesdropper.
    DegenerateZero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JammerSolution {
    pub q_star: f64,
    pub branch: JammerBranch,
    pub discriminant: f64,
    /// Larger root of the derivative numerator.
    pub root_pos: Option<f64>,
    /// Smaller root; always negative, kept for inspection.
    pub root_neg: Option<f64>,
}

/// Optimal jammer power in `[0, q_cap]` for fixed filter constants.
pub fn optimal_jammer_power(c: &JammerConstants, q_cap: f64) -> Result<JammerSolution> {
    if !c.is_finite() {
        return Err(Error::NonFinite("jammer constants"));
    }
    if !(q_cap.is_finite() && q_cap >= 0.0) {
        return Err(Error::NonFinite("jammer power cap"));
    }
    let discriminant = c.discriminant();
    let solution = |q_star, branch, root_pos, root_neg| JammerSolution {
        q_star,
        branch,
        discriminant,
        root_pos,
        root_neg,
    };
    if c.zeta == 0.0 {
        return Ok(solution(0.0, JammerBranch::DegenerateZero, None, None));
    }
    if c.delta == 0.0 {
        return Ok(solution(q_cap, JammerBranch::DegenerateFull, None, None));
    }
    if discriminant <= 0.0 {
        return Ok(solution(0.0, JammerBranch::Zero, None, None));
    }

    let a = -c.delta * c.zeta * c.zeta;
    let root_neg = -c.kappa / c.zeta - discriminant.sqrt() / (2.0 * c.delta * c.zeta * c.zeta);
    // Product of roots is c0 / a; this avoids cancellation in
    // -kappa/zeta + sqrt(disc)/(2 delta zeta^2).
    let c0 = c.derivative_numerator(0.0);
    let root_pos = c0 / (a * root_neg);

    let (q_star, branch) = if root_pos <= 0.0 {
        (0.0, JammerBranch::Zero)
    } else if root_pos >= q_cap {
        (q_cap, JammerBranch::Cap)
    } else {
        (root_pos, JammerBranch::Interior)
    };
    Ok(solution(q_star, branch, Some(root_pos), Some(root_neg)))
}

/// Stopping rule for the alternating optimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationSettings {
    /// Relative tolerance on successive objective values.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IterationSettings {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 50,
        }
    }
}

impl IterationSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidConfig(
                "iteration settings need tol > 0 and max_iter >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Converged operating point of one link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkOptimum {
    /// MMSE filter for the final jammer power.
    pub filter: ReceiveFilter,
    pub q: f64,
    /// Objective at (`filter`, `q`); unclamped.
    pub chi_tilde: f64,
    /// Objective at the jammer-free starting point.
    pub initial_chi_tilde: f64,
    pub iterations: usize,
    /// Objective after each filter/power update.
    pub trace: Vec<f64>,
    pub last_branch: JammerBranch,
}

/// Alternates the MMSE filter and the closed-form jammer power, starting
/// from `q = 0`, until the objective changes by at most
/// `tol * max(1, |chi|)` or `max_iter` updates have run.
pub fn optimize_link(
    link: &LinkChannels<'_>,
    p: f64,
    q_cap: f64,
    n0: f64,
    settings: &IterationSettings,
) -> Result<LinkOptimum> {
    settings.validate()?;
    let h_nb = link.h_nb();
    let start = mmse_filter(link.g_mb, None, p, 0.0, n0)?;
    let initial = chi_tilde(&start, 0.0, link, p, n0);

    let mut q = 0.0;
    let mut prev = initial;
    let mut trace = Vec::new();
    let mut last_branch = JammerBranch::DegenerateZero;
    for _ in 0..settings.max_iter {
        let w = mmse_filter(link.g_mb, h_nb, p, q, n0)?;
        let constants = jammer_constants(&w, link, p, n0);
        let sol = optimal_jammer_power(&constants, q_cap)?;
        q = sol.q_star;
        last_branch = sol.branch;
        let value = constants.chi_tilde(q);
        trace.push(value);
        if (value - prev).abs() <= settings.tol * value.abs().max(1.0) {
            break;
        }
        prev = value;
    }

    let filter = mmse_filter(link.g_mb, h_nb, p, q, n0)?;
    let chi = chi_tilde(&filter, q, link, p, n0);
    Ok(LinkOptimum {
        filter,
        q,
        chi_tilde: chi,
        initial_chi_tilde: initial,
        iterations: trace.len(),
        trace,
        last_branch,
    })
}

/// Result of optimizing CU `cu` with jammer `d2d` on RB `rb`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairEvaluation {
    pub cu: usize,
    pub d2d: usize,
    pub rb: usize,
    pub filter: ReceiveFilter,
    pub q: f64,
    pub chi_tilde: f64,
    /// `(V/K) [chi_tilde]^+` in bit/s.
    pub psi: f64,
    /// Objective at the jammer-free starting point.
    pub initial_chi_tilde: f64,
    pub iterations: usize,
    pub trace: Vec<f64>,
}

pub fn optimize_pair(
    chans: &ChannelSet,
    cu: usize,
    d2d: usize,
    rb: usize,
    cfg: &SystemConfig,
    settings: &IterationSettings,
) -> Result<PairEvaluation> {
    let jammer = JammerChannels {
        h_nb: chans.h_nb(d2d, rb),
        h_ne: chans.h_ne(d2d, rb),
    };
    let link = LinkChannels::new(chans.g_mb(cu, rb), chans.g_me(cu, rb), Some(jammer))?;
    let opt = optimize_link(
        &link,
        cfg.cu_power_cap[cu],
        cfg.d2d_power_cap[d2d],
        cfg.noise_power,
        settings,
    )?;
    Ok(PairEvaluation {
        cu,
        d2d,
        rb,
        psi: cfg.bandwidth / cfg.num_rbs as f64 * opt.chi_tilde.max(0.0),
        filter: opt.filter,
        q: opt.q,
        chi_tilde: opt.chi_tilde,
        initial_chi_tilde: opt.initial_chi_tilde,
        iterations: opt.iterations,
        trace: opt.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ComplexVector;
    use crate::rates::chi_sinr;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vector(rng: &mut impl Rng, len: usize, scale: f64) -> ComplexVector {
        ComplexVector::new(
            (0..len)
                .map(|_| {
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale
                })
                .collect(),
        )
    }

    struct Instance {
        gb: ComplexVector,
        ge: ComplexVector,
        hb: ComplexVector,
        he: ComplexVector,
    }

    impl Instance {
        fn random(rng: &mut impl Rng, b: usize, e: usize) -> Self {
            let mut s = || 10f64.powf(rng.random_range(-1.0..1.0));
            let (sb, se, shb, she) = (s(), s(), s(), s());
            Self {
                gb: random_vector(rng, b, sb),
                ge: random_vector(rng, e, se),
                hb: random_vector(rng, b, shb),
                he: random_vector(rng, e, she),
            }
        }

        fn link(&self) -> LinkChannels<'_> {
            LinkChannels::new(
                &self.gb,
                &self.ge,
                Some(JammerChannels {
                    h_nb: &self.hb,
                    h_ne: &self.he,
                }),
            )
            .unwrap()
        }
    }

    fn grid_argmax(f: impl Fn(f64) -> f64, q_cap: f64, points: usize) -> (f64, f64) {
        (0..points)
            .map(|i| {
                let q = q_cap * i as f64 / (points - 1) as f64;
                (q, f(q))
            })
            .fold((0.0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
    }

    #[test]
    fn power_rule_without_jammer_follows_norms() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let gb = random_vector(&mut rng, 4, 1.0);
            let ge = random_vector(&mut rng, 4, 1.0);
            let link = LinkChannels::new(&gb, &ge, None).unwrap();
            let w = mmse_filter(&gb, None, 0.5, 0.0, 0.1).unwrap();
            let p = cu_power_rule(&w, &link, 0.0, 0.1, 0.5).unwrap();
            let expected = if sq_norm(&gb) > sq_norm(&ge) { 0.5 } else { 0.0 };
            assert_eq!(p, expected);
        }
    }

    #[test]
    fn power_rule_matches_objective_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let inst = Instance::random(&mut rng, 4, 4);
            let link = inst.link();
            let q = rng.random_range(0.0..2.0);
            let w = ReceiveFilter::new(random_vector(&mut rng, 4, 1.0)).unwrap();
            let p = cu_power_rule(&w, &link, q, 0.2, 1.0).unwrap();
            assert!(p == 0.0 || p == 1.0);
            let chi = chi_sinr(&w, q, &link, 1.0, 0.2).unwrap();
            if chi.abs() > 1e-12 {
                assert_eq!(p == 1.0, chi > 0.0);
            }
        }
    }

    #[test]
    fn power_rule_tie_switches_off() {
        // B = E = 1, w = 1, g_mb = g_me = 1, no jammer: lhs = rhs = 1.
        let one = ComplexVector::from_real(&[1.0]);
        let link = LinkChannels::new(&one, &one, None).unwrap();
        let w = ReceiveFilter::new(one.clone()).unwrap();
        assert_eq!(cu_power_rule(&w, &link, 0.0, 1.0, 1.0).unwrap(), 0.0);
        let zero = ReceiveFilter::new_unchecked(ComplexVector::zeros(1));
        assert!(cu_power_rule(&zero, &link, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn power_rule_tie_survives_rounding() {
        // Identical BS and eavesdropper channels with the MMSE filter: both
        // sides agree only up to rounding.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..500 {
            let g = random_vector(&mut rng, 4, 1e-9);
            let link = LinkChannels::new(&g, &g, None).unwrap();
            let w = mmse_filter(&g, None, 0.1, 0.0, 1e-13).unwrap();
            assert_eq!(cu_power_rule(&w, &link, 0.0, 1e-13, 0.1).unwrap(), 0.0);
        }
    }

    #[test]
    fn constants_vanish_for_orthogonal_channels() {
        let gb = ComplexVector::basis(2, 0);
        let hb = ComplexVector::basis(2, 1);
        let ge = ComplexVector::basis(3, 0);
        let he = ComplexVector::basis(3, 2);
        let link = LinkChannels::new(&gb, &ge, Some(JammerChannels { h_nb: &hb, h_ne: &he })).unwrap();
        let w = ReceiveFilter::new(gb.clone()).unwrap();
        let c = jammer_constants(&w, &link, 1.0, 1.0);
        assert_eq!(c.delta, 0.0);
        assert_eq!(c.zeta, 0.0);
    }

    #[test]
    fn constants_reproduce_objective() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let inst = Instance::random(&mut rng, 4, 3);
            let link = inst.link();
            let w = ReceiveFilter::new(random_vector(&mut rng, 4, 1.0)).unwrap();
            let (p, n0) = (rng.random_range(0.1..3.0), 0.3);
            let c = jammer_constants(&w, &link, p, n0);
            for _ in 0..10 {
                let q = rng.random_range(0.0..5.0);
                let direct = chi_tilde(&w, q, &link, p, n0);
                assert!((c.chi_tilde(q) - direct).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn closed_form_interior_example() {
        let c = JammerConstants {
            eps: 2.0,
            delta: 1.0,
            vareps: 4.0,
            zeta: 1.0,
            kappa: 1.0,
        };
        let sol = optimal_jammer_power(&c, 10.0).unwrap();
        assert_eq!(sol.branch, JammerBranch::Interior);
        assert_relative_eq!(sol.discriminant, 16.0);
        assert_relative_eq!(sol.q_star, 1.0, max_relative = 1e-12);
        assert_relative_eq!(sol.root_neg.unwrap(), -3.0, max_relative = 1e-12);
        let (q_grid, _) = grid_argmax(|q| c.chi_tilde(q), 10.0, 100_001);
        assert!((q_grid - 1.0).abs() <= 1e-3);

        let capped = optimal_jammer_power(&c, 0.5).unwrap();
        assert_eq!(capped.branch, JammerBranch::Cap);
        assert_eq!(capped.q_star, 0.5);
        let (q_grid, _) = grid_argmax(|q| c.chi_tilde(q), 0.5, 100_001);
        assert_eq!(q_grid, 0.5);
    }

    #[test]
    fn closed_form_degenerate_cases() {
        let base = JammerConstants {
            eps: 2.0,
            delta: 1.0,
            vareps: 4.0,
            zeta: 0.0,
            kappa: 1.0,
        };
        let sol = optimal_jammer_power(&base, 3.0).unwrap();
        assert_eq!((sol.q_star, sol.branch), (0.0, JammerBranch::DegenerateZero));

        let invisible_at_bs = JammerConstants {
            delta: 0.0,
            zeta: 0.5,
            ..base
        };
        let sol = optimal_jammer_power(&invisible_at_bs, 3.0).unwrap();
        assert_eq!((sol.q_star, sol.branch), (3.0, JammerBranch::DegenerateFull));
        assert!(invisible_at_bs.derivative_numerator(1.0) > 0.0);

        // eps*zeta <= delta*kappa: the derivative is never positive.
        let harmful = JammerConstants {
            eps: 0.5,
            delta: 1.0,
            vareps: 4.0,
            zeta: 1.0,
            kappa: 1.0,
        };
        let sol = optimal_jammer_power(&harmful, 3.0).unwrap();
        assert_eq!((sol.q_star, sol.branch), (0.0, JammerBranch::Zero));

        let nan = JammerConstants { eps: f64::NAN, ..base };
        assert!(optimal_jammer_power(&nan, 1.0).is_err());
    }

    #[test]
    fn closed_form_beats_grid_on_random_constants() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut lg = |lo: f64, hi: f64| 10f64.powf(rng.random_range(lo..hi));
        for _ in 0..200 {
            let c = JammerConstants {
                eps: lg(-3.0, 0.0),
                delta: lg(-3.0, 2.0),
                vareps: lg(-2.0, 3.0),
                zeta: lg(-3.0, 2.0),
                kappa: lg(-3.0, 1.0),
            };
            let q_cap = lg(-2.0, 2.0);
            let sol = optimal_jammer_power(&c, q_cap).unwrap();
            let (_, best) = grid_argmax(|q| c.chi_tilde(q), q_cap, 20_001);
            assert!(c.chi_tilde(sol.q_star) >= best - 1e-9);
            if sol.branch == JammerBranch::Interior {
                let r = sol.root_pos.unwrap();
                let scale = c.delta * c.zeta * c.zeta * r * r
                    + 2.0 * c.delta * c.zeta * c.kappa * r
                    + c.eps * c.vareps * c.zeta
                    + c.delta * c.vareps * c.kappa
                    + c.delta * c.kappa * c.kappa;
                assert!(c.derivative_numerator(r).abs() <= 1e-6 * scale);
            }
            if let Some(r) = sol.root_neg {
                assert!(r < 0.0);
            }
        }
    }

    #[test]
    fn inert_jammer_converges_immediately() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let gb = random_vector(&mut rng, 4, 1.0);
        let ge = random_vector(&mut rng, 4, 0.5);
        let zb = ComplexVector::zeros(4);
        let ze = ComplexVector::zeros(4);
        let link = LinkChannels::new(&gb, &ge, Some(JammerChannels { h_nb: &zb, h_ne: &ze })).unwrap();
        let opt = optimize_link(&link, 1.0, 1.0, 0.1, &IterationSettings::default()).unwrap();
        assert_eq!(opt.iterations, 1);
        assert_eq!(opt.q, 0.0);
        assert_relative_eq!(opt.chi_tilde, opt.initial_chi_tilde, max_relative = 1e-12);
    }

    #[test]
    fn alternating_optimization_is_monotone_and_blockwise_optimal() {
        // Block ascent reaches a stationary point of a nonconcave objective,
        // so the check is optimality of each block at the returned point,
        // not global optimality over q.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let settings = IterationSettings::default();
        for _ in 0..100 {
            let inst = Instance::random(&mut rng, 4, 4);
            let link = inst.link();
            let (p, q_cap, n0) = (1.0, rng.random_range(0.1..10.0), 0.1);
            let opt = optimize_link(&link, p, q_cap, n0, &settings).unwrap();
            assert!(opt.iterations <= settings.max_iter);
            let mut prev = opt.initial_chi_tilde;
            for &v in &opt.trace {
                assert!(v >= prev - 1e-9);
                prev = v;
            }
            assert!(opt.chi_tilde >= prev - 1e-9);
            assert!(opt.chi_tilde >= opt.initial_chi_tilde - 1e-9);
            assert!((0.0..=q_cap).contains(&opt.q));

            let tol = 1e-5 * opt.chi_tilde.abs().max(1.0);
            let (_, best_q) = grid_argmax(|q| chi_tilde(&opt.filter, q, &link, p, n0), q_cap, 10_000);
            assert!(opt.chi_tilde >= best_q - tol, "{} vs q-block grid {}", opt.chi_tilde, best_q);
            let w = mmse_filter(&inst.gb, Some(&inst.hb), p, opt.q, n0).unwrap();
            assert_relative_eq!(chi_tilde(&w, opt.q, &link, p, n0), opt.chi_tilde, max_relative = 1e-12);
        }
    }

    #[test]
    fn pair_evaluation_on_sampled_channels() {
        let cfg = SystemConfig::default();
        let s = crate::model::sample_scenario(&cfg, 17).unwrap();
        let settings = IterationSettings::default();
        for m in 0..cfg.num_cus {
            for n in 0..cfg.num_d2d {
                let ev = optimize_pair(&s.channels, m, n, m, &cfg, &settings).unwrap();
                assert_relative_eq!(ev.psi, ev.chi_tilde.max(0.0) / 6.0, max_relative = 1e-15);
                let w8 = mmse_filter(s.channels.g_mb(m, m), None, cfg.cu_power_cap[m], 0.0, cfg.noise_power)
                    .unwrap();
                let link = LinkChannels::new(s.channels.g_mb(m, m), s.channels.g_me(m, m), None).unwrap();
                let floor = chi_tilde(&w8, 0.0, &link, cfg.cu_power_cap[m], cfg.noise_power);
                assert!(ev.chi_tilde >= floor - 1e-9);
                assert!(ev.q <= cfg.d2d_power_cap[n]);
            }
        }
    }

    #[test]
    fn rejects_bad_settings() {
        let g = ComplexVector::basis(2, 0);
        let link = LinkChannels::new(&g, &g, None).unwrap();
        let bad = IterationSettings { tol: 0.0, max_iter: 5 };
        assert!(optimize_link(&link, 1.0, 1.0, 1.0, &bad).is_err());
        let bad = IterationSettings { tol: 1e-8, max_iter: 0 };
        assert!(optimize_link(&link, 1.0, 1.0, 1.0, &bad).is_err());
    }
}
