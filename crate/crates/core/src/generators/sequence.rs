//! Driving sequences `k ↦ v_k` for generalised Peres forests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The golden ratio `(1 + √5)/2`.
pub const PHI: f64 = 1.618_033_988_749_895;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", content = "params")]
pub enum SequenceSpec {
    /// `v_{2k} = 0`, `v_{2k+1} = φk`.
    Golden,
    /// Tsokanos' dyadic sequence, indexed from 1.
    Tsokanos,
    /// `v_k = αk²`.
    Quadratic { alpha: f64 },
    /// Interleaving of the linear sequences `(θ_i/s)·k`, `1 ≤ i ≤ s`.
    ConcatLinear { thetas: Vec<Vec<f64>> },
}

impl SequenceSpec {
    pub fn dim(&self) -> usize {
        match self {
            SequenceSpec::ConcatLinear { thetas } => thetas.first().map_or(0, Vec::len),
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SequenceSpec::Quadratic { alpha } if !alpha.is_finite() => {
                Err(Error::arg("quadratic coefficient must be finite"))
            }
            SequenceSpec::ConcatLinear { thetas } => {
                let d = self.dim();
                if thetas.is_empty() || d == 0 {
                    return Err(Error::arg("concatenated linear sequence needs at least one non-empty vector"));
                }
                if thetas.iter().any(|t| t.len() != d) {
                    return Err(Error::arg("all theta vectors must share one dimension"));
                }
                if thetas.iter().flatten().any(|x| !x.is_finite()) {
                    return Err(Error::arg("theta entries must be finite"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Smallest index at which the sequence is defined.
    pub fn first_index(&self) -> i64 {
        match self {
            SequenceSpec::Tsokanos => 1,
            _ => 0,
        }
    }

    /// Evaluates `v_k`; negative indices use the symmetric extension `v_{−k} = v_k`.
    pub fn eval(&self, k: i64) -> Result<Vec<f64>> {
        self.validate()?;
        let k = k.unsigned_abs();
        Ok(match self {
            SequenceSpec::Golden => vec![golden(k)],
            SequenceSpec::Tsokanos => {
                if k == 0 {
                    return Err(Error::arg("the Tsokanos sequence is indexed from n = 1"));
                }
                vec![tsokanos(k)]
            }
            SequenceSpec::Quadratic { alpha } => {
                let kf = k as f64;
                vec![alpha * kf * kf]
            }
            SequenceSpec::ConcatLinear { thetas } => concat_linear(thetas, k),
        })
    }

    /// Value used at index `k` when building forests over all of `ℤ`: like
    /// [`eval`](Self::eval) but defined as the zero vector at `k = 0` for
    /// sequences indexed from 1.
    pub fn forest_value(&self, k: i64) -> Result<Vec<f64>> {
        if k == 0 && self.first_index() > 0 {
            self.validate()?;
            return Ok(vec![0.0; self.dim()]);
        }
        self.eval(k)
    }

    /// `v_k` for `k = start, start+1, …` (`count` terms), scalar sequences only.
    pub fn scalar_terms(&self, start: i64, count: usize) -> Result<Vec<f64>> {
        if self.dim() != 1 {
            return Err(Error::arg("scalar_terms requires a one-dimensional sequence"));
        }
        (0..count as i64)
            .map(|j| self.eval(start + j).map(|v| v[0]))
            .collect()
    }
}

fn golden(k: u64) -> f64 {
    if k % 2 == 0 {
        0.0
    } else {
        PHI * ((k - 1) / 2) as f64
    }
}

fn concat_linear(thetas: &[Vec<f64>], k: u64) -> Vec<f64> {
    let s = thetas.len() as u64;
    // k = js + i with 1 ≤ i ≤ s
    let i = (if k == 0 { s - 1 } else { (k - 1) % s }) as usize;
    let scale = k as f64 / s as f64;
    thetas[i].iter().map(|t| t * scale).collect()
}

/// Decomposes `n ≥ 1` as `n = k·2^i + 2^{i−1} − 2` with `i ≥ 1`, `k ≥ 0`.
pub fn tsokanos_level(n: u64) -> (u32, u64) {
    let n = n as i128;
    let mut i = 1u32;
    loop {
        let modulus = 1i128 << i;
        let residue = (1i128 << (i - 1)) - 2;
        if n >= residue && (n - residue) % modulus == 0 {
            return (i, ((n - residue) / modulus) as u64);
        }
        i += 1;
    }
}

/// `v_n` of Tsokanos' sequence.
///
/// With `M = 2^{i²+2}` the inner index is split as `k = r·M + s`, `1 ≤ s ≤ M`,
/// and `v_n = rs/2^{2i²+4}`, plus `s/2^{i²+4}` when `r` is even. The quotient
/// `r` is not reduced modulo `M`, and `k = 0` gives `v_n = 0`.
pub fn tsokanos(n: u64) -> f64 {
    assert!(n >= 1, "the Tsokanos sequence is indexed from n = 1");
    let (i, k) = tsokanos_level(n);
    if k == 0 {
        return 0.0;
    }
    let sq = i * i;
    let (r, s) = if sq + 2 >= 64 {
        (0u64, k)
    } else {
        let m = 1u64 << (sq + 2);
        let r = (k - 1) / m;
        (r, k - r * m)
    };
    let mut v = (r as u128 * s as u128) as f64 * (-((2 * sq + 4) as f64)).exp2();
    if r % 2 == 0 {
        v += s as f64 * (-((sq + 4) as f64)).exp2();
    }
    v
}
