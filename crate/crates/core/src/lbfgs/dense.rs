//! Explicit `d x d` forms of the L-BFGS operator. Verification oracles only.

use nalgebra::{DMatrix, DVector};

use super::LbfgsMemory;
use crate::error::{Error, Result};

pub const DENSE_MAX_DIM: usize = 2000;

fn check(memory: &LbfgsMemory, d: usize) -> Result<()> {
    if d > DENSE_MAX_DIM {
        return Err(Error::Resource(format!(
            "dense oracle refused for dimension {d} > {DENSE_MAX_DIM}"
        )));
    }
    if d != memory.dim() {
        return Err(Error::invalid(format!(
            "requested dimension {d} but memory has {}",
            memory.dim()
        )));
    }
    Ok(())
}

/// Inverse-Hessian approximation built by the BFGS update, oldest pair first:
///
/// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ`, starting from
/// `H = (s_newᵀ y_new / ‖y_new‖²) I`.
pub fn dense_h(memory: &LbfgsMemory, d: usize) -> Result<DMatrix<f64>> {
    check(memory, d)?;
    let Some(newest) = memory.newest() else {
        return Ok(DMatrix::identity(d, d));
    };
    let mut h = DMatrix::identity(d, d) * newest.initial_scaling();
    let eye = DMatrix::<f64>::identity(d, d);
    for pair in memory.pairs() {
        let s = DVector::from_column_slice(pair.s());
        let y = DVector::from_column_slice(pair.y());
        let rho = pair.rho();
        // V = I − ρ y sᵀ
        let v = &eye - (&y * s.transpose()) * rho;
        h = v.transpose() * h * v + (&s * s.transpose()) * rho;
    }
    Ok(h)
}

/// Hessian approximation `B = H⁻¹` built by the direct BFGS update:
///
/// `B ← B − B s sᵀ B / (sᵀ B s) + y yᵀ / (yᵀ s)`, starting from
/// `B = (‖y_new‖² / s_newᵀ y_new) I`.
pub fn dense_b(memory: &LbfgsMemory, d: usize) -> Result<DMatrix<f64>> {
    check(memory, d)?;
    let Some(newest) = memory.newest() else {
        return Ok(DMatrix::identity(d, d));
    };
    let mut b = DMatrix::identity(d, d) / newest.initial_scaling();
    for pair in memory.pairs() {
        let s = DVector::from_column_slice(pair.s());
        let y = DVector::from_column_slice(pair.y());
        let bs = &b * &s;
        let sbs = s.dot(&bs);
        b = b - (&bs * bs.transpose()) / sbs + (&y * y.transpose()) * pair.rho();
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Prng;

    fn random_memory(p: &mut Prng, d: usize, m: usize) -> LbfgsMemory {
        let mut mem = LbfgsMemory::new(d, m);
        while mem.len() < m {
            let s = p.normal_vec(d);
            let y: Vec<f64> = s.iter().map(|v| v * (0.2 + 3.0 * p.uniform())).collect();
            mem.push_pair(s, y).unwrap();
        }
        mem
    }

    #[test]
    fn worked_pair() {
        let mut mem = LbfgsMemory::new(2, 1);
        assert_eq!(dense_h(&mem, 2).unwrap(), DMatrix::identity(2, 2));
        mem.push_pair(vec![1.0, 0.0], vec![2.0, 0.0]).unwrap();
        let h = dense_h(&mem, 2).unwrap();
        assert_eq!(h, DMatrix::from_diagonal_element(2, 2, 0.5));
        let b = dense_b(&mem, 2).unwrap();
        assert_eq!(b, DMatrix::from_diagonal_element(2, 2, 2.0));
        assert_eq!(&h * DVector::from_vec(vec![2.0, 0.0]), DVector::from_vec(vec![1.0, 0.0]));
    }

    #[test]
    fn size_gate() {
        let mem = LbfgsMemory::new(DENSE_MAX_DIM + 1, 1);
        assert!(matches!(dense_h(&mem, DENSE_MAX_DIM + 1), Err(Error::Resource(_))));
        assert!(matches!(dense_b(&mem, DENSE_MAX_DIM + 1), Err(Error::Resource(_))));
    }

    #[test]
    fn h_is_symmetric_and_inverts_b() {
        let mut p = Prng::new(3);
        for _ in 0..20 {
            let d = 2 + p.below(18);
            let m = 1 + p.below(6);
            let mem = random_memory(&mut p, d, m);
            let h = dense_h(&mem, d).unwrap();
            let b = dense_b(&mem, d).unwrap();
            assert!((&h - h.transpose()).amax() <= 1e-12 * h.amax());
            let prod = &b * &h;
            assert!((prod - DMatrix::<f64>::identity(d, d)).amax() <= 1e-8);
            let newest = mem.newest().unwrap();
            let bs = &b * DVector::from_column_slice(newest.s());
            let y = DVector::from_column_slice(newest.y());
            assert!((bs - &y).amax() <= 1e-10 * y.amax());
        }
    }

    #[test]
    fn two_loop_matches_dense() {
        let mut p = Prng::new(4);
        for _ in 0..20 {
            let d = 1 + p.below(30);
            let m = p.below(8);
            let mem = random_memory(&mut p, d, m);
            let v = p.normal_vec(d);
            let dense = dense_h(&mem, d).unwrap() * DVector::from_column_slice(&v);
            let fast = mem.two_loop_apply(&v).unwrap();
            assert!(crate::linalg::rel_error(&fast, dense.as_slice()) <= 1e-10);
        }
    }
}
