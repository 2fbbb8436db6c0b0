//! Seeded random Clifford numbers and operators for property suites.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::clifford::{CliffordNumber, ImaginaryUnit, Paravector};
use crate::linalg::{CliffordMatrix, ModuleVector};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Coefficients uniform in `[-scale, scale]`.
pub fn clifford<R: Rng>(rng: &mut R, n: usize, scale: f64) -> CliffordNumber {
    let mut c = CliffordNumber::zero(n);
    for v in c.coeffs_mut() {
        *v = rng.gen_range(-scale..=scale);
    }
    c
}

pub fn paravector<R: Rng>(rng: &mut R, n: usize, scale: f64) -> Paravector {
    let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-scale..=scale)).collect();
    Paravector::new(rng.gen_range(-scale..=scale), &v).expect("n in range")
}

pub fn unit<R: Rng>(rng: &mut R, n: usize) -> ImaginaryUnit {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        if v.iter().map(|x| x * x).sum::<f64>() > 1e-4 {
            return ImaginaryUnit::from_direction(&v).expect("nonzero direction");
        }
    }
}

pub fn matrix<R: Rng>(rng: &mut R, n: usize, d: usize, scale: f64) -> CliffordMatrix {
    let entries = (0..d * d).map(|_| clifford(rng, n, scale)).collect();
    CliffordMatrix::from_entries(n, d, entries).expect("shape")
}

pub fn vector<R: Rng>(rng: &mut R, n: usize, d: usize, scale: f64) -> ModuleVector {
    ModuleVector::new((0..d).map(|_| clifford(rng, n, scale)).collect()).expect("shape")
}

/// Options for `bisectorial`.
#[derive(Clone, Copy, Debug)]
pub struct BisectorialOptions {
    /// Eigen spheres lie at angle below this from the real axis.
    pub max_angle: f64,
    pub min_modulus: f64,
    pub max_modulus: f64,
    /// Number of zero eigenvalues (semisimple).
    pub zeros: usize,
    /// Size of the random perturbation of the identity in the similarity.
    pub mixing: f64,
}

impl Default for BisectorialOptions {
    fn default() -> Self {
        Self {
            max_angle: 0.3,
            min_modulus: 0.5,
            max_modulus: 2.5,
            zeros: 0,
            mixing: 0.3,
        }
    }
}

/// `P diag(lambda) P^-1` with paravector eigenvalues inside `D_max_angle`
/// and `P = I + mixing * random`.
pub fn bisectorial<R: Rng>(rng: &mut R, n: usize, d: usize, opts: &BisectorialOptions) -> CliffordMatrix {
    let lambdas: Vec<CliffordNumber> = (0..d)
        .map(|k| {
            if k < opts.zeros {
                return CliffordNumber::zero(n);
            }
            let r = rng.gen_range(opts.min_modulus..=opts.max_modulus);
            let a = rng.gen_range(0.0..opts.max_angle);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let j = unit(rng, n).to_clifford();
            CliffordNumber::scalar(n, sign * r * a.cos()) + j.scale(r * a.sin())
        })
        .collect();
    let diag = CliffordMatrix::diag(&lambdas).expect("nonempty");
    loop {
        let mut p = matrix(rng, n, d, opts.mixing / d as f64);
        p.axpy(1.0, &CliffordMatrix::identity(n, d));
        if let Ok(pinv) = p.invert() {
            let t = p.try_matmul(&diag).and_then(|m| m.try_matmul(&pinv)).expect("shapes");
            return t;
        }
    }
}
