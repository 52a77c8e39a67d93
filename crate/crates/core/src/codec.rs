//! Linear codes over the reals with `l1` decoding.
//!
//! The encoder is a Haar-random `m x n` matrix `Q` with orthonormal columns;
//! its range `Y` is the code. A received word is decoded by the `l1` metric
//! projection onto `Y` followed by `Q^T`. [`Codec`] also keeps the complement
//! basis `E = Y^perp`, which is where the dual certificates of
//! [`crate::geometry`] live.
//!
//! The quantized variant stores code symbols as integer multiples of
//! `1/(10 m)` and rounds decoded messages to integers.

use serde::{Deserialize, Serialize};

use crate::bp::{decode_l1, BpError, SubspaceBasis};
use crate::linalg::{complement_basis, sample_haar_orthonormal, LinalgError, NormKind, RealMatrix, RealVector, SeedSpec};

/// `x_hat` counts as the transmitted message when `||x_hat - x||_inf` is at most this.
pub const RECOVERY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CodecError {
    #[error("invalid code parameters: {0}")]
    InvalidParams(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("corruption index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("corruption index {0} repeated")]
    DuplicateIndex(usize),
    #[error("symbol {value} at position {index} outside the alphabet 0..={p}")]
    OutOfAlphabet { index: usize, value: i64, p: i64 },
    #[error("quantized code needs m <= 2n (m = {m}, n = {n})")]
    RedundancyTooHigh { m: usize, n: usize },
    #[error("malformed codec description: {0}")]
    Json(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Bp(#[from] BpError),
}

/// `(n, m, r)` with `R = m - n` redundant coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    pub m: usize,
    pub n: usize,
    pub r: usize,
}

impl CodeParams {
    pub fn new(m: usize, n: usize, r: usize) -> Result<Self, CodecError> {
        if n == 0 || m <= n {
            return Err(CodecError::InvalidParams(format!("need m > n >= 1, got m = {m}, n = {n}")));
        }
        if r >= m {
            return Err(CodecError::InvalidParams(format!("need r < m, got r = {r}, m = {m}")));
        }
        Ok(Self { m, n, r })
    }

    /// Number of redundant coordinates, `m - n`.
    #[allow(non_snake_case)]
    pub fn R(&self) -> usize {
        self.m - self.n
    }

    /// Corruption rate `r / m`.
    pub fn epsilon(&self) -> f64 {
        self.r as f64 / self.m as f64
    }
}

/// Serialized form of a [`Codec`]: the matrices are regenerated from the seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodecSpec {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub seed: SeedSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codec {
    params: CodeParams,
    seed: SeedSpec,
    y: SubspaceBasis,
    e: SubspaceBasis,
}

/// Coordinates `support` of a word receive the additive errors `values`.
#[derive(Debug, Clone, PartialEq)]
pub struct Corruption {
    support: Vec<usize>,
    values: Vec<f64>,
}

impl Corruption {
    pub fn new(support: Vec<usize>, values: Vec<f64>) -> Result<Self, CodecError> {
        if support.len() != values.len() {
            return Err(CodecError::DimensionMismatch { expected: support.len(), found: values.len() });
        }
        let mut seen = support.clone();
        seen.sort_unstable();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(CodecError::DuplicateIndex(w[0]));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite { index: i }.into());
        }
        Ok(Self { support, values })
    }

    pub fn none() -> Self {
        Self { support: Vec::new(), values: Vec::new() }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }
}

/// Adds the corruption to `y`.
pub fn corrupt(y: &RealVector, c: &Corruption) -> Result<RealVector, CodecError> {
    let mut out = y.clone();
    for (&i, &v) in c.support.iter().zip(&c.values) {
        if i >= y.dim() {
            return Err(CodecError::IndexOutOfRange { index: i, len: y.dim() });
        }
        out[i] += v;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub x_hat: RealVector,
    pub u: RealVector,
    pub unique_flag: bool,
}

impl Decoded {
    /// `||x_hat - x||_inf <= RECOVERY_TOL`.
    pub fn recovers(&self, x: &RealVector) -> bool {
        self.x_hat.sub(x).norm(NormKind::Linf) <= RECOVERY_TOL
    }
}

/// Comparison of the decoding error with four times the small-noise `l1` mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    /// `||u - y||_1`.
    pub error_l1: f64,
    /// `||h||_1`.
    pub noise_l1: f64,
    /// `4 ||h||_1`.
    pub bound: f64,
    pub holds: bool,
}

/// Integer levels `k_i` standing for the code symbols `k_i / (10 m)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantizedWord {
    levels: Vec<i64>,
}

impl QuantizedWord {
    pub fn from_levels(levels: Vec<i64>) -> Self {
        Self { levels }
    }

    pub fn levels(&self) -> &[i64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// `1 / (10 m)`.
    pub fn grid_step(&self) -> f64 {
        grid_step(self.levels.len())
    }

    pub fn dequantize(&self) -> RealVector {
        let scale = 10.0 * self.levels.len() as f64;
        RealVector::from_vec_unchecked(self.levels.iter().map(|&k| k as f64 / scale).collect())
    }

    /// `(min, max)` level, `(0, 0)` for an empty word.
    pub fn level_range(&self) -> (i64, i64) {
        let lo = self.levels.iter().copied().min().unwrap_or(0);
        let hi = self.levels.iter().copied().max().unwrap_or(0);
        (lo, hi)
    }

    /// Adds integer `offsets` to the levels at `support`; the result stays on the grid.
    pub fn corrupt(&self, support: &[usize], offsets: &[i64]) -> Result<QuantizedWord, CodecError> {
        if support.len() != offsets.len() {
            return Err(CodecError::DimensionMismatch { expected: support.len(), found: offsets.len() });
        }
        let mut levels = self.levels.clone();
        for (&i, &o) in support.iter().zip(offsets) {
            if i >= levels.len() {
                return Err(CodecError::IndexOutOfRange { index: i, len: levels.len() });
            }
            levels[i] += o;
        }
        Ok(QuantizedWord { levels })
    }

    /// `||dequantize - y||_1`, computed in level units to avoid grid drift.
    pub fn l1_error_against(&self, y: &RealVector) -> f64 {
        let scale = 10.0 * self.levels.len() as f64;
        self.levels.iter().zip(y.iter()).map(|(&k, v)| (k as f64 - v * scale).abs()).sum::<f64>() / scale
    }
}

pub fn grid_step(m: usize) -> f64 {
    1.0 / (10.0 * m as f64)
}

/// Largest level magnitude an `{0..=p}^n` message can produce: `||Qx||_inf <= p sqrt(n)`.
pub fn level_bound(p: i64, n: usize, m: usize) -> i64 {
    (p as f64 * (n as f64).sqrt() * 10.0 * m as f64).ceil() as i64
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedDecoded {
    pub symbols: Vec<i64>,
    pub x_prime: RealVector,
    pub u: RealVector,
    pub unique_flag: bool,
}

impl Codec {
    /// Samples the encoder `Q` and the complement basis `E`.
    pub fn new(params: CodeParams, seed: SeedSpec) -> Result<Self, CodecError> {
        let q = sample_haar_orthonormal(params.m, params.n, seed)?;
        let e = complement_basis(&q)?;
        Ok(Self { params, seed, y: SubspaceBasis::new(q)?, e: SubspaceBasis::new(e)? })
    }

    pub fn from_spec(spec: CodecSpec) -> Result<Self, CodecError> {
        Self::new(CodeParams::new(spec.m, spec.n, spec.r)?, spec.seed)
    }

    pub fn spec(&self) -> CodecSpec {
        CodecSpec { m: self.params.m, n: self.params.n, r: self.params.r, seed: self.seed }
    }

    /// `{"m":..,"n":..,"r":..,"seed":{"master_seed":..,"stream_index":..}}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.spec()).expect("codec spec serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, CodecError> {
        let spec: CodecSpec = serde_json::from_str(s).map_err(|e| CodecError::Json(e.to_string()))?;
        Self::from_spec(spec)
    }

    pub fn params(&self) -> CodeParams {
        self.params
    }

    pub fn seed(&self) -> SeedSpec {
        self.seed
    }

    pub fn q(&self) -> &RealMatrix {
        self.y.matrix()
    }

    /// The code subspace `Y = range(Q)`.
    pub fn range(&self) -> &SubspaceBasis {
        &self.y
    }

    /// `E = Y^perp`.
    pub fn complement(&self) -> &SubspaceBasis {
        &self.e
    }

    pub fn encode(&self, x: &RealVector) -> Result<RealVector, CodecError> {
        if x.dim() != self.params.n {
            return Err(CodecError::DimensionMismatch { expected: self.params.n, found: x.dim() });
        }
        Ok(RealVector::from_vec_unchecked(self.q().matvec(x.as_slice())))
    }

    pub fn decode(&self, y_prime: &RealVector) -> Result<Decoded, CodecError> {
        if y_prime.dim() != self.params.m {
            return Err(CodecError::DimensionMismatch { expected: self.params.m, found: y_prime.dim() });
        }
        let res = decode_l1(&self.y, y_prime)?;
        let x_hat = self.q().tr_matvec(res.u.as_slice());
        Ok(Decoded { x_hat: RealVector::from_vec_unchecked(x_hat), u: res.u, unique_flag: res.unique_flag })
    }

    /// Same minimization as [`Codec::decode`]. When the caller knows the clean
    /// codeword `y` and the dense noise `h`, the report compares `||u - y||_1`
    /// with `4 ||h||_1`.
    pub fn robust_decode(
        &self,
        y_double_prime: &RealVector,
        truth: Option<(&RealVector, &RealVector)>,
    ) -> Result<(Decoded, Option<BoundReport>), CodecError> {
        let dec = self.decode(y_double_prime)?;
        let report = truth.map(|(y, h)| {
            let error_l1 = dec.u.sub(y).norm(NormKind::L1);
            let noise_l1 = h.norm(NormKind::L1);
            let bound = 4.0 * noise_l1;
            BoundReport { error_l1, noise_l1, bound, holds: error_l1 <= bound }
        });
        Ok((dec, report))
    }

    fn check_quantized(&self) -> Result<(), CodecError> {
        let CodeParams { m, n, .. } = self.params;
        if m > 2 * n {
            return Err(CodecError::RedundancyTooHigh { m, n });
        }
        Ok(())
    }

    /// Encodes a message over `{0, ..., p}` (0 included as the degenerate
    /// symbol) and rounds each coefficient half away from zero onto the
    /// `1/(10 m)` grid.
    pub fn quantized_encode(&self, x: &[i64], p: i64) -> Result<QuantizedWord, CodecError> {
        self.check_quantized()?;
        if x.len() != self.params.n {
            return Err(CodecError::DimensionMismatch { expected: self.params.n, found: x.len() });
        }
        if let Some(i) = x.iter().position(|&v| v < 0 || v > p) {
            return Err(CodecError::OutOfAlphabet { index: i, value: x[i], p });
        }
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let y = self.q().matvec(&xf);
        let scale = 10.0 * self.params.m as f64;
        Ok(QuantizedWord { levels: y.iter().map(|v| (v * scale).round() as i64).collect() })
    }

    /// Decodes the dequantized word and rounds `Q^T u` to the nearest integers.
    pub fn quantized_decode(&self, received: &QuantizedWord) -> Result<QuantizedDecoded, CodecError> {
        self.check_quantized()?;
        let dec = self.decode(&received.dequantize())?;
        let symbols = dec.x_hat.iter().map(|v| v.round() as i64).collect();
        Ok(QuantizedDecoded { symbols, x_prime: dec.x_hat, u: dec.u, unique_flag: dec.unique_flag })
    }
}

/// Convenience wrapper matching the free-function style of the other modules.
pub fn make_codec(params: CodeParams, seed: SeedSpec) -> Result<Codec, CodecError> {
    Codec::new(params, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn codec(m: usize, n: usize, r: usize, s: u64) -> Codec {
        make_codec(CodeParams::new(m, n, r).unwrap(), SeedSpec::new(s, 0)).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(CodeParams::new(4, 4, 0).is_err());
        assert!(CodeParams::new(4, 0, 0).is_err());
        assert!(CodeParams::new(4, 2, 4).is_err());
        let p = CodeParams::new(100, 60, 5).unwrap();
        assert_eq!(p.R(), 40);
        assert!((p.epsilon() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn plane_codec_pairs_orthogonal_units() {
        let c = codec(2, 1, 0, 3);
        let q = c.q().column(0);
        let e = c.complement().matrix().column(0);
        assert!((q[0] * q[0] + q[1] * q[1] - 1.0).abs() < 1e-12);
        assert!((q[0] * e[0] + q[1] * e[1]).abs() < 1e-12);
    }

    #[test]
    fn larger_codec_is_split_orthogonally() {
        let c = codec(64, 32, 0, 5);
        let cross = c.complement().matrix().transpose().matmul(c.q());
        assert!(cross.max_abs() <= 1e-10);
        assert_eq!(c, codec(64, 32, 0, 5));
    }

    #[test]
    fn encode_is_an_isometry() {
        let c = codec(10, 4, 1, 8);
        assert_eq!(c.encode(&RealVector::zeros(4)).unwrap().norm(NormKind::L2), 0.0);
        let x = RealVector::new(vec![0.5, -0.5, 0.5, 0.5]).unwrap();
        assert!((c.encode(&x).unwrap().norm(NormKind::L2) - 1.0).abs() < 1e-9);
        let y = c.encode(&RealVector::unit(4, 2)).unwrap();
        assert_eq!(y.as_slice(), c.q().column(2).as_slice());
        assert!(matches!(c.encode(&RealVector::zeros(3)), Err(CodecError::DimensionMismatch { .. })));
    }

    #[test]
    fn corruption_touches_only_its_support() {
        let y = RealVector::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(corrupt(&y, &Corruption::none()).unwrap(), y);
        let yp = corrupt(&y, &Corruption::new(vec![0], vec![1e6]).unwrap()).unwrap();
        assert_eq!(yp.as_slice(), &[1.0 + 1e6, 2.0, 3.0]);
        assert!(matches!(
            corrupt(&y, &Corruption::new(vec![3], vec![1.0]).unwrap()),
            Err(CodecError::IndexOutOfRange { index: 3, len: 3 })
        ));
        assert!(matches!(Corruption::new(vec![1, 1], vec![1.0, 2.0]), Err(CodecError::DuplicateIndex(1))));
    }

    #[test]
    fn diagonal_codec_corrects_one_error() {
        let s = 1.0 / 3f64.sqrt();
        let q = RealMatrix::new(3, 1, vec![s, s, s]).unwrap();
        let c = Codec {
            params: CodeParams::new(3, 1, 1).unwrap(),
            seed: SeedSpec::new(0, 0),
            e: SubspaceBasis::new(complement_basis(&q).unwrap()).unwrap(),
            y: SubspaceBasis::new(q).unwrap(),
        };
        let x = RealVector::new(vec![3f64.sqrt()]).unwrap();
        let y = c.encode(&x).unwrap();
        let yp = corrupt(&y, &Corruption::new(vec![0], vec![2.0]).unwrap()).unwrap();
        let dec = c.decode(&yp).unwrap();
        assert!(dec.recovers(&x), "{:?}", dec.x_hat);
    }

    #[test]
    fn quantization_stays_within_half_a_step() {
        let c = codec(32, 16, 1, 13);
        let x: Vec<i64> = (0..16).map(|i| 1 + (i * 5) % 8).collect();
        let word = c.quantized_encode(&x, 8).unwrap();
        let y = c.encode(&RealVector::new(x.iter().map(|&v| v as f64).collect()).unwrap()).unwrap();
        assert!(word.l1_error_against(&y) <= 1.0 / 20.0);
        let bound = level_bound(8, 16, 32);
        let (lo, hi) = word.level_range();
        assert!(lo >= -bound && hi <= bound);
        assert_eq!(c.quantized_decode(&word).unwrap().symbols, x);

        let zero = c.quantized_encode(&[0; 16], 8).unwrap();
        assert!(zero.levels().iter().all(|&k| k == 0));
        assert!(matches!(c.quantized_encode(&[9; 16], 8), Err(CodecError::OutOfAlphabet { index: 0, value: 9, p: 8 })));
        assert!(matches!(codec(40, 16, 1, 1).quantized_encode(&[1; 16], 8), Err(CodecError::RedundancyTooHigh { .. })));
    }

    #[test]
    fn json_round_trip_regenerates_matrices() {
        let c = codec(12, 6, 1, 99);
        let s = c.to_json();
        assert_eq!(s, r#"{"m":12,"n":6,"r":1,"seed":{"master_seed":99,"stream_index":0}}"#);
        assert_eq!(Codec::from_json(&s).unwrap(), c);
        assert!(matches!(Codec::from_json("{\"m\":1}"), Err(CodecError::Json(_))));
    }
}
