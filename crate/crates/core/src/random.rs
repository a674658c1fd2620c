//! Seeded random inputs for property suites.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::bracket::Bracket;
use crate::tensor::{kernel_basis, pair_index, wedge_dim, CMatrix, C64};

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Gaussian matrix rescaled to unit Frobenius norm.
pub fn unit_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let a = gaussian_matrix(rng, n, n);
    let norm = a.norm();
    a / C64::new(norm, 0.0)
}

/// Haar-distributed unitary matrix from the QR factorization of a Gaussian
/// matrix with the phases of `R`'s diagonal absorbed into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let qr = gaussian_matrix(rng, n, n).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Random nilpotent Lie bracket on `ℂⁿ` built from `generators` abelian
/// generators by successive one-dimensional central extensions. At step `k`
/// the constants `c_ij^k` (`i < j < k`) form a random element of the kernel
/// of the linear cocycle condition, so the Jacobi identity holds exactly in
/// exact arithmetic. The result has unit norm.
pub fn random_nilpotent_bracket<R: Rng + ?Sized>(rng: &mut R, n: usize, generators: usize) -> Bracket {
    assert!(generators >= 2 && generators <= n, "need 2 <= generators <= n");
    let mut mu = Bracket::zero(n);
    let mut mat = mu.matrix().clone();
    for k in generators..n {
        // Cocycle map on ω ∈ Λ²(ℂ^k)*: (a,b,c) ↦ Σ_cyc Σ_l c_ab^l ω(Z_l, Z_c).
        let pairs = wedge_dim(k);
        let triples: Vec<(usize, usize, usize)> =
            (0..k).flat_map(|a| ((a + 1)..k).flat_map(move |b| ((b + 1)..k).map(move |c| (a, b, c)))).collect();
        let mut map = CMatrix::zeros(triples.len().max(1), pairs);
        for (row, &(a, b, c)) in triples.iter().enumerate() {
            for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
                for l in 0..k {
                    let coeff = mu.constant(x, y, l);
                    if coeff == C64::new(0.0, 0.0) || l == z {
                        continue;
                    }
                    let (col, sign) = if l < z { (pair_index(k, l, z), 1.0) } else { (pair_index(k, z, l), -1.0) };
                    map[(row, col)] += coeff * sign;
                }
            }
        }
        let cocycles = kernel_basis(&map, 1e-10);
        let weights: Vec<C64> = (0..cocycles.ncols()).map(|_| complex_normal(rng)).collect();
        let omega = cocycles * nalgebra::DVector::from_vec(weights);
        for i in 0..k {
            for j in (i + 1)..k {
                mat[(k, pair_index(n, i, j))] = omega[pair_index(k, i, j)];
            }
        }
        mu = Bracket::from_matrix(mat.clone()).expect("shape");
    }
    let norm = mu.norm();
    if norm > 0.0 {
        mu.scale(1.0 / norm)
    } else {
        mu
    }
}

/// Random nilpotent bracket of dimension `3..=max_n`, conjugated by a random
/// unitary so that no basis direction is distinguished.
pub fn random_nilpotent_sample<R: Rng + ?Sized>(rng: &mut R, max_n: usize) -> Bracket {
    random_nilpotent_sample_in(rng, 3, max_n)
}

/// As [`random_nilpotent_sample`] with dimension in `min_n..=max_n`
/// (`min_n` is raised to 3).
pub fn random_nilpotent_sample_in<R: Rng + ?Sized>(rng: &mut R, min_n: usize, max_n: usize) -> Bracket {
    let lo = min_n.max(3);
    let n = rng.random_range(lo..=max_n.max(lo));
    let generators = rng.random_range(2..=(n - 1).max(2));
    let mu = random_nilpotent_bracket(rng, n, generators);
    let u = random_unitary(rng, n);
    crate::bracket::act_gl(&u, &mu).expect("unitary is invertible")
}

/// `ℂ⁵` brackets with `Z₁∧Z₂ ↦ Z₃ + aZ₄ + bZ₅`, `Z₁∧Z₃ ↦ Z₄`, `Z₂∧Z₃ ↦ Z₅`
/// for random `a, b`. The complement component of the centre split is a
/// Heisenberg bracket, hence a fixed point of the normalized flow.
pub fn heisenberg_extension<R: Rng + ?Sized>(rng: &mut R) -> Bracket {
    let one = C64::new(1.0, 0.0);
    Bracket::from_constants(
        5,
        [
            (0, 1, 2, one),
            (0, 1, 3, complex_normal(rng)),
            (0, 1, 4, complex_normal(rng)),
            (0, 2, 3, one),
            (1, 2, 4, one),
        ],
    )
    .expect("valid constants")
}
