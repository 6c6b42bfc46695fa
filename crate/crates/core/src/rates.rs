//! Receive filters, post-processing SINRs, MMSE values and secrecy rates.
//!
//! Conventions: `w^H g` is the filter output for channel `g`; rates use
//! `log2` and are scaled by the per-RB bandwidth `V / K`.

use num_complex::Complex64;

use crate::algebra::{hpd_solve, sq_norm, ComplexVector, HermitianMatrix};
use crate::error::{Error, Result};

/// BS receive filter `w_m` for one CU.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiveFilter(ComplexVector);

impl ReceiveFilter {
    /// Wraps arbitrary weights; rejects non-finite or all-zero vectors.
    pub fn new(w: ComplexVector) -> Result<Self> {
        if !w.is_finite() {
            return Err(Error::NonFinite("receive filter"));
        }
        if sq_norm(&w) == 0.0 {
            return Err(Error::ZeroVector("receive filter"));
        }
        Ok(Self(w))
    }

    /// Wraps weights without the nonzero check (used to probe the MMSE
    /// expression at `w = 0`).
    pub fn new_unchecked(w: ComplexVector) -> Self {
        Self(w)
    }

    pub fn weights(&self) -> &ComplexVector {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Channels of a jamming D2D transmitter as seen by the BS and eavesdropper.
#[derive(Debug, Clone, Copy)]
pub struct JammerChannels<'a> {
    pub h_nb: &'a ComplexVector,
    pub h_ne: &'a ComplexVector,
}

/// Channels relevant to one CU on its RB, with an optional jamming partner.
#[derive(Debug, Clone, Copy)]
pub struct LinkChannels<'a> {
    pub g_mb: &'a ComplexVector,
    pub g_me: &'a ComplexVector,
    pub jammer: Option<JammerChannels<'a>>,
}

impl<'a> LinkChannels<'a> {
    /// Validates lengths (`B` for BS-side vectors, `E` for eavesdropper-side)
    /// and that `g_me` is nonzero.
    pub fn new(
        g_mb: &'a ComplexVector,
        g_me: &'a ComplexVector,
        jammer: Option<JammerChannels<'a>>,
    ) -> Result<Self> {
        if let Some(j) = jammer {
            if j.h_nb.len() != g_mb.len() {
                return Err(Error::DimensionMismatch {
                    expected: g_mb.len(),
                    found: j.h_nb.len(),
                });
            }
            if j.h_ne.len() != g_me.len() {
                return Err(Error::DimensionMismatch {
                    expected: g_me.len(),
                    found: j.h_ne.len(),
                });
            }
        }
        if sq_norm(g_me) == 0.0 {
            return Err(Error::ZeroVector("g_me"));
        }
        Ok(Self { g_mb, g_me, jammer })
    }

    pub fn h_nb(&self) -> Option<&'a ComplexVector> {
        self.jammer.map(|j| j.h_nb)
    }

    pub fn h_ne(&self) -> Option<&'a ComplexVector> {
        self.jammer.map(|j| j.h_ne)
    }
}

/// SINRs and the resulting secrecy rate of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkRates {
    /// Post-processing SINR at the BS.
    pub eta: f64,
    /// Post-processing SINR at the eavesdropper.
    pub gamma: f64,
    /// `(V/K) [log2(1+eta) - log2(1+gamma)]^+` in bit/s.
    pub secrecy_rate: f64,
}

fn check_same_len(a: &ComplexVector, b: &ComplexVector) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(())
}

/// Jammer-aware MMSE filter
/// `w = sqrt(P) (P g g^H + q h h^H + N0 I)^-1 g`.
///
/// The CU's own rank-one term is removed with the matrix inversion lemma:
/// with `S = q h h^H + N0 I` and `u = S^-1 g`, `w = sqrt(P) u / (1 + P g^H u)`.
/// Only `S` is factorized, which keeps the solve well conditioned however
/// strong the CU's own channel is. With `h` absent (or `q = 0`) this is the
/// jammer-free MMSE receiver.
pub fn mmse_filter(
    g: &ComplexVector,
    h: Option<&ComplexVector>,
    p: f64,
    q: f64,
    n0: f64,
) -> Result<ReceiveFilter> {
    if !(p > 0.0 && q >= 0.0 && n0 > 0.0) || !(p.is_finite() && q.is_finite() && n0.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "mmse_filter needs P > 0, q >= 0, N0 > 0 (got P={p}, q={q}, N0={n0})"
        )));
    }
    if !g.is_finite() {
        return Err(Error::NonFinite("g_mb"));
    }
    let mut s = HermitianMatrix::scaled_identity(g.len(), n0);
    if let Some(h) = h {
        check_same_len(g, h)?;
        if !h.is_finite() {
            return Err(Error::NonFinite("h_nb"));
        }
        if q > 0.0 {
            s.add_outer(q, h)?;
        }
    }
    let u = hpd_solve(&s, g)?;
    let eta = p * g.dot(&u).re;
    let w = u.scaled(Complex64::new(p.sqrt() / (1.0 + eta), 0.0));
    ReceiveFilter::new(w)
}

/// BS post-processing SINR `p |w^H g|^2 / (q |w^H h|^2 + N0 ||w||^2)`.
pub fn sinr_bs(
    w: &ReceiveFilter,
    g: &ComplexVector,
    h: Option<&ComplexVector>,
    p: f64,
    q: f64,
    n0: f64,
) -> Result<f64> {
    let w = w.weights();
    check_same_len(w, g)?;
    let wn = sq_norm(w);
    if wn == 0.0 {
        return Err(Error::ZeroVector("receive filter"));
    }
    let interference = match h {
        Some(h) => {
            check_same_len(w, h)?;
            q * w.dot(h).norm_sqr()
        }
        None => 0.0,
    };
    Ok(p * w.dot(g).norm_sqr() / (interference + n0 * wn))
}

/// Eavesdropper SINR under maximal-ratio combining matched to `g_me`:
/// `p ||g_me||^4 / (q |g_me^H h_ne|^2 + N0 ||g_me||^2)`.
pub fn sinr_eve_mrc(
    g_me: &ComplexVector,
    h_ne: Option<&ComplexVector>,
    p: f64,
    q: f64,
    n0: f64,
) -> Result<f64> {
    let gn = sq_norm(g_me);
    if gn == 0.0 {
        return Err(Error::ZeroVector("g_me"));
    }
    let interference = match h_ne {
        Some(h) => {
            check_same_len(g_me, h)?;
            q * g_me.dot(h).norm_sqr()
        }
        None => 0.0,
    };
    Ok(p * gn * gn / (interference + n0 * gn))
}

pub fn secrecy_rate(eta: f64, gamma: f64, bandwidth: f64, num_rbs: usize) -> LinkRates {
    let diff = (1.0 + eta).log2() - (1.0 + gamma).log2();
    LinkRates {
        eta,
        gamma,
        secrecy_rate: bandwidth / num_rbs as f64 * diff.max(0.0),
    }
}

/// Secrecy rate a CU achieves on an RB without a jammer, transmitting at `p`
/// with the MMSE filter. The BS SINR then reduces to `p ||g_mb||^2 / N0`.
pub fn phi_no_d2d(
    g_mb: &ComplexVector,
    g_me: &ComplexVector,
    p: f64,
    n0: f64,
    bandwidth: f64,
    num_rbs: usize,
) -> f64 {
    let eta = p * sq_norm(g_mb) / n0;
    let gamma = p * sq_norm(g_me) / n0;
    secrecy_rate(eta, gamma, bandwidth, num_rbs).secrecy_rate
}

/// Mean-square error of the filtered CU symbol:
/// `|sqrt(P) w^H g - 1|^2 + q |w^H h|^2 + N0 ||w||^2`.
pub fn mmse_of_link(
    w: &ReceiveFilter,
    g: &ComplexVector,
    h: Option<&ComplexVector>,
    p: f64,
    q: f64,
    n0: f64,
) -> f64 {
    let w = w.weights();
    debug_assert_eq!(w.len(), g.len());
    let bias = (w.dot(g) * p.sqrt() - 1.0).norm_sqr();
    let interference = h.map_or(0.0, |h| q * w.dot(h).norm_sqr());
    bias + interference + n0 * sq_norm(w)
}

/// Eavesdropper term `log2(1 + gamma)` shared by both objective forms.
fn eve_log_term(link: &LinkChannels<'_>, q: f64, p: f64, n0: f64) -> f64 {
    let gn = sq_norm(link.g_me);
    let interference = link.h_ne().map_or(0.0, |h| q * link.g_me.dot(h).norm_sqr());
    (1.0 + p * gn * gn / (interference + n0 * gn)).log2()
}

/// Pair objective in MMSE form: `-log2(MMSE) - log2(1 + gamma)`.
///
/// Left unclamped; it equals the SINR form [`chi_sinr`] whenever `w` is the
/// MMSE filter for the same `q`.
pub fn chi_tilde(w: &ReceiveFilter, q: f64, link: &LinkChannels<'_>, p: f64, n0: f64) -> f64 {
    let mse = mmse_of_link(w, link.g_mb, link.h_nb(), p, q, n0);
    -mse.log2() - eve_log_term(link, q, p, n0)
}

/// Pair objective in SINR form: `log2(1 + eta) - log2(1 + gamma)`, unclamped.
pub fn chi_sinr(
    w: &ReceiveFilter,
    q: f64,
    link: &LinkChannels<'_>,
    p: f64,
    n0: f64,
) -> Result<f64> {
    let eta = sinr_bs(w, link.g_mb, link.h_nb(), p, q, n0)?;
    Ok((1.0 + eta).log2() - eve_log_term(link, q, p, n0))
}

/// Full rate evaluation of a link at an operating point.
pub fn link_rates(
    w: &ReceiveFilter,
    link: &LinkChannels<'_>,
    p: f64,
    q: f64,
    n0: f64,
    bandwidth: f64,
    num_rbs: usize,
) -> Result<LinkRates> {
    let eta = sinr_bs(w, link.g_mb, link.h_nb(), p, q, n0)?;
    let gamma = sinr_eve_mrc(link.g_me, link.h_ne(), p, q, n0)?;
    Ok(secrecy_rate(eta, gamma, bandwidth, num_rbs))
}
