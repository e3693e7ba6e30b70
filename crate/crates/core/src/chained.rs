//! The chained (Braunstein–Caves / BKP) Bell game with `k` settings per
//! party:
//!
//! ```text
//! S_k = Σ_{l=1..k} ⟨A_l B_l⟩ + ⟨A_{l+1} B_l⟩,   A_{k+1} = −A_1
//! ```
//!
//! `k = 2` is CHSH in the sign pattern ⟨A1B1⟩ + ⟨A2B1⟩ + ⟨A2B2⟩ − ⟨A1B2⟩.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{correlator, DensityMatrix, Observable, Plane};
use crate::scalar::Real;

/// Settings of one edge's chained game. Angles are stored for settings
/// `1..=k` only; the wrap-around `A_{k+1} = −A_1` is applied by the scorer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainedGameSpec<T> {
    pub k: usize,
    #[serde(default)]
    pub plane: Plane,
    #[serde(rename = "a")]
    pub settings_a: Vec<T>,
    #[serde(rename = "b")]
    pub settings_b: Vec<T>,
}

impl<T: Real> ChainedGameSpec<T> {
    pub fn new(plane: Plane, settings_a: Vec<T>, settings_b: Vec<T>) -> Result<Self> {
        let spec = Self {
            k: settings_a.len(),
            plane,
            settings_a,
            settings_b,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::TooFewSettings(self.k));
        }
        for (party, list) in [('a', &self.settings_a), ('b', &self.settings_b)] {
            if list.len() != self.k {
                return Err(Error::AngleCount {
                    party,
                    expected: self.k,
                    found: list.len(),
                });
            }
        }
        Ok(())
    }

    /// Observable for party A's setting `l` (0-based).
    pub fn observable_a(&self, l: usize) -> Observable<T> {
        Observable::new(self.settings_a[l], self.plane)
    }

    /// Observable for party B's setting `l` (0-based).
    pub fn observable_b(&self, l: usize) -> Observable<T> {
        Observable::new(self.settings_b[l], self.plane)
    }
}

/// Characteristic values of a bipartite game: local, communication
/// (algebraic), quantum, and white-noise scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameBounds<T> {
    #[serde(rename = "B_L")]
    pub local: T,
    #[serde(rename = "B_S")]
    pub svetlichny: T,
    #[serde(rename = "B_Q")]
    pub quantum: T,
    #[serde(rename = "B_N")]
    pub noise: T,
}

impl<T: Real> GameBounds<T> {
    /// Checks `B_L ≤ B_Q ≤ B_S` and `B_N ≤ B_L`.
    pub fn validate(&self) -> Result<()> {
        let slack = T::tol(crate::scalar::SCORE_TOL);
        if !(self.local <= self.quantum + slack
            && self.quantum <= self.svetlichny + slack
            && self.noise <= self.local + slack)
        {
            return Err(Error::InvalidBounds(format!(
                "need B_N <= B_L <= B_Q <= B_S, got ({}, {}, {}, {})",
                self.noise, self.local, self.quantum, self.svetlichny
            )));
        }
        Ok(())
    }
}

/// `(B_L, B_S, B_Q, B_N) = (2k−2, 2k, 2k·cos(π/2k), 0)`.
pub fn chained_bounds<T: Real>(k: usize) -> Result<GameBounds<T>> {
    if k < 2 {
        return Err(Error::TooFewSettings(k));
    }
    let kk = T::from_count(k);
    let two = T::lit(2.0);
    Ok(GameBounds {
        local: two * kk - two,
        svetlichny: two * kk,
        quantum: two * kk * (T::PI() / (two * kk)).cos(),
        noise: T::zero(),
    })
}

/// Integer local and communication bounds `(2k−2, 2k)` for exact arithmetic.
pub fn chained_integer_bounds(k: usize) -> Result<(i64, i64)> {
    if k < 2 {
        return Err(Error::TooFewSettings(k));
    }
    let k = k as i64;
    Ok((2 * k - 2, 2 * k))
}

/// Correlator coefficients of `S_k`, indexed `[l_a][l_b]` (0-based).
///
/// `+1` on `(l, l)` and `(l+1, l)`, `−1` on `(0, k−1)` from the wrap-around
/// term, zero elsewhere.
pub fn chained_coefficients(k: usize) -> Result<Vec<Vec<i64>>> {
    if k < 2 {
        return Err(Error::TooFewSettings(k));
    }
    let mut c = vec![vec![0i64; k]; k];
    for l in 0..k {
        c[l][l] += 1;
        if l + 1 < k {
            c[l + 1][l] += 1;
        } else {
            c[0][l] -= 1;
        }
    }
    Ok(c)
}

/// Planar settings reaching `2k·cos(π/2k)` on the singlet.
///
/// Party A sits at `π(l−1)/k` and party B at `π(2l−1)/(2k) + π`, both in the
/// XZ plane. The extra `π` on B flips the sign of the singlet correlator
/// `−cos(α−β)`, so every one of the `2k` terms contributes `+cos(π/2k)`,
/// the wrap-around term included. Party B holds the interleaved settings.
pub fn optimal_settings<T: Real>(k: usize) -> Result<ChainedGameSpec<T>> {
    optimal_settings_in(k, Plane::XZ)
}

/// [`optimal_settings`] on a chosen plane. The singlet is rotation-invariant,
/// so the same angles are optimal in either plane.
pub fn optimal_settings_in<T: Real>(k: usize, plane: Plane) -> Result<ChainedGameSpec<T>> {
    if k < 2 {
        return Err(Error::TooFewSettings(k));
    }
    let kk = T::from_count(k);
    let two = T::lit(2.0);
    let a = (0..k).map(|l| T::PI() * T::from_count(l) / kk).collect();
    let b = (0..k)
        .map(|l| T::PI() * (two * T::from_count(l) + T::one()) / (two * kk) + T::PI())
        .collect();
    ChainedGameSpec::new(plane, a, b)
}

/// `S_k` evaluated from exact Born-rule correlators.
pub fn chained_score<T: Real>(state: &DensityMatrix<T>, spec: &ChainedGameSpec<T>) -> Result<T> {
    spec.validate()?;
    let coeffs = chained_coefficients(spec.k)?;
    let mut total = T::zero();
    for (la, row) in coeffs.iter().enumerate() {
        for (lb, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let e = correlator(state, &spec.observable_a(la), &spec.observable_b(lb))?;
            total = total + T::lit(c as f64) * e;
        }
    }
    Ok(total)
}
