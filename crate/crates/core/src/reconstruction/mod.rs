//! Matrix-side representations of compressed tensors.

pub mod blr;
pub mod kron_sum;

pub use blr::{blr_from_kruskal, blr_from_tucker, BlockLowRankRep};
pub use kron_sum::{kron_sum_from_kruskal, kron_sum_from_tucker, CpSplit, KronSumRep, KronTerm};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompositions::linalg::qr_thin;
    use crate::decompositions::{hosvd, tucker_partial, Factor, KruskalRep, ModeSpec, SharedSource};
    use crate::error::Error;
    use crate::pattern::{
        mat_to_tensor_dense, struct_assemble, struct_assemble_dense, tensor_to_mat_dense, BlockMatrix,
        BlockPattern, StructureClass,
    };
    use crate::testutil::random_matrix;
    use crate::tensor::{Matrix, Tensor};
    use proptest::prelude::*;

    fn toeplitz(l: usize, m: usize, n: usize) -> BlockPattern {
        BlockPattern::build(StructureClass::Toeplitz { symmetric: false }, l, l, m, n).unwrap()
    }

    fn toy() -> Matrix {
        Matrix::from_row_slice(2, 2, &[1.0, 3.0, 2.0, 1.0])
    }

    fn toy_kruskal() -> KruskalRep {
        KruskalRep::new(
            Matrix::from_element(1, 1, 1.0),
            Matrix::from_column_slice(3, 1, &[2f64.sqrt(), 2.0, 3.0]),
            Matrix::from_element(1, 1, 1.0),
        )
        .unwrap()
    }

    /// `Σ_k kron(E_k, slice_k)` straight from the definition.
    fn dense_map(t: &Tensor, p: &BlockPattern) -> Matrix {
        let mut out = Matrix::zeros(p.rows(), p.cols());
        for k in 0..p.p() {
            out += p.placement(k).kronecker(&t.lateral_slice(k));
        }
        out
    }

    fn dense_sum(rep: &KronSumRep) -> Matrix {
        let mut out = Matrix::zeros(rep.rows(), rep.cols());
        for (j, t) in rep.terms.iter().enumerate() {
            out += rep.c_matrix(j).to_dense().kronecker(&t.d);
        }
        out
    }

    fn rel(a: &Matrix, b: &Matrix) -> f64 {
        (a - b).norm() / a.norm().max(f64::MIN_POSITIVE)
    }

    fn matvec_dense(a: &Matrix, x: &[f64]) -> Vec<f64> {
        (a * nalgebra::DVector::from_column_slice(x)).as_slice().to_vec()
    }

    fn vec_rel(a: &[f64], b: &[f64]) -> f64 {
        let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let n: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
        d / n.max(f64::MIN_POSITIVE)
    }

    fn random_conforming(p: &BlockPattern, seed: u64) -> Matrix {
        let (m, n) = p.block_dims();
        let blocks: Vec<Matrix> = (0..p.p()).map(|k| random_matrix(m, n, seed * 101 + k as u64)).collect();
        struct_assemble_dense(p, &blocks).unwrap()
    }

    #[test]
    fn toy_kruskal_routes_are_exact() {
        let p = toeplitz(2, 1, 1);
        for split in [CpSplit::Identity, CpSplit::Qr] {
            let ks = kron_sum_from_kruskal(&toy_kruskal(), &p, split).unwrap();
            assert!(rel(&toy(), &ks.densify().unwrap()) <= 1e-12);
            let y = ks.matvec(&[1.0, 1.0]).unwrap();
            assert!((y[0] - 4.0).abs() < 1e-12 && (y[1] - 3.0).abs() < 1e-12);
            assert_eq!(ks.matvec(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        }
        let blr = blr_from_kruskal(&toy_kruskal(), &p).unwrap();
        assert!(rel(&toy(), &blr.densify().unwrap()) <= 1e-12);
        let y = blr.matvec(&[1.0, 1.0]).unwrap();
        assert!((y[0] - 4.0).abs() < 1e-12 && (y[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rank_one_kruskal_matches_dense_expansion() {
        let p = toeplitz(3, 2, 3);
        let k = KruskalRep::new(random_matrix(2, 1, 1), random_matrix(5, 1, 2), random_matrix(3, 1, 3)).unwrap();
        let ks = kron_sum_from_kruskal(&k, &p, CpSplit::Identity).unwrap();
        assert_eq!(ks.terms.len(), 1);
        let want = dense_map(&k.expand(), &p);
        assert!(rel(&want, &ks.densify().unwrap()) <= 1e-12);
        assert!(rel(&want, &dense_sum(&ks)) <= 1e-12);
    }

    #[test]
    fn identity_mode2_factor_gives_class_indicators() {
        let p = toeplitz(3, 2, 2);
        let k = KruskalRep::new(random_matrix(2, 5, 1), Matrix::identity(5, 5), random_matrix(2, 5, 3)).unwrap();
        let ks = kron_sum_from_kruskal(&k, &p, CpSplit::Identity).unwrap();
        for j in 0..5 {
            let mut support: Vec<(usize, usize)> = ks.c_matrix(j).entries.iter().map(|e| (e.0, e.1)).collect();
            let mut want = p.positions(j).to_vec();
            support.sort_unstable();
            want.sort_unstable();
            assert_eq!(support, want);
        }
        let qr = kron_sum_from_kruskal(&k, &p, CpSplit::Qr).unwrap();
        assert!(rel(&ks.densify().unwrap(), &qr.densify().unwrap()) <= 1e-12);
    }

    #[test]
    fn untruncated_tucker_terms_are_weighted_blocks() {
        let p = toeplitz(3, 2, 2);
        let a = random_conforming(&p, 4);
        let t = mat_to_tensor_dense(&a, &p).unwrap();
        let rep = tucker_partial(&t, &[ModeSpec::Identity; 3], SharedSource::Designated).unwrap();
        let ks = kron_sum_from_tucker(&rep, &p).unwrap();
        let bm = BlockMatrix::from_dense(&a, 2, 2).unwrap();
        for (k, term) in ks.terms.iter().enumerate() {
            let mut e = vec![0.0; p.p()];
            e[k] = 1.0;
            assert_eq!(term.coeffs, e);
            let (i, j) = p.positions(k)[0];
            let want = bm.block(i, j).unwrap() * (p.eta(k) as f64).sqrt();
            assert!((&term.d - want).norm() < 1e-14);
        }
        assert!(rel(&a, &ks.densify().unwrap()) <= 1e-12);

        let blr = blr_from_tucker(&rep, &p).unwrap();
        for (k, f) in blr.middle.iter().enumerate() {
            let (i, j) = p.positions(k)[0];
            let want = bm.block(i, j).unwrap() * (p.eta(k) as f64).sqrt();
            assert!((f - want).norm() < 1e-14);
        }
    }

    #[test]
    fn tridiagonal_structure_is_inherited() {
        let l = 6;
        let nb = 5;
        let p = BlockPattern::build(StructureClass::Banded { bandwidth: 1, symmetric: false }, l, l, nb, nb).unwrap();
        let tri = |seed: u64| {
            let r = random_matrix(nb, nb, seed);
            Matrix::from_fn(nb, nb, |i, j| if i.abs_diff(j) <= 1 { r[(i, j)] } else { 0.0 })
        };
        let blocks: Vec<Matrix> = (0..p.p()).map(|k| tri(k as u64)).collect();
        let a = struct_assemble_dense(&p, &blocks).unwrap();
        let t = mat_to_tensor_dense(&a, &p).unwrap();
        let rep = tucker_partial(&t, &[ModeSpec::Identity, ModeSpec::Rank(4), ModeSpec::Identity], SharedSource::Designated)
            .unwrap();
        let ks = kron_sum_from_tucker(&rep, &p).unwrap();
        for (j, term) in ks.terms.iter().enumerate() {
            assert!(ks.c_matrix(j).entries.iter().all(|&(r, c, _)| r.abs_diff(c) <= 1));
            for c in 0..nb {
                for r in 0..nb {
                    if r.abs_diff(c) > 1 {
                        assert_eq!(term.d[(r, c)], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn full_tucker_of_toy_is_exact() {
        let p = toeplitz(2, 1, 1);
        let t = mat_to_tensor_dense(&toy(), &p).unwrap();
        let rep = hosvd(&t, &[1, 3, 1]).unwrap();
        assert!(rel(&toy(), &kron_sum_from_tucker(&rep, &p).unwrap().densify().unwrap()) <= 1e-12);
        assert!(rel(&toy(), &blr_from_tucker(&rep, &p).unwrap().densify().unwrap()) <= 1e-12);
    }

    #[test]
    fn orthonormal_kruskal_blr_middle_is_diagonal() {
        let p = toeplitz(2, 4, 5);
        let x = qr_thin(&random_matrix(4, 2, 1)).unwrap().0;
        let z = qr_thin(&random_matrix(5, 2, 2)).unwrap().0;
        let y = random_matrix(3, 2, 3);
        let k = KruskalRep::new(x.clone(), y.clone(), z).unwrap();
        let blr = blr_from_kruskal(&k, &p).unwrap();
        assert_eq!(blr.middle.len(), p.p());
        if let Factor::Dense(qx) = &blr.left {
            assert!((qx.abs() - x.abs()).norm() < 1e-12);
        }
        for (kk, f) in blr.middle.iter().enumerate() {
            assert_eq!(f.shape(), (2, 2));
            assert!(f[(0, 1)].abs() < 1e-12 && f[(1, 0)].abs() < 1e-12);
            assert!((f[(0, 0)].abs() - y[(kk, 0)].abs()).abs() < 1e-12);
            assert!((f[(1, 1)].abs() - y[(kk, 1)].abs()).abs() < 1e-12);
        }
        assert!(rel(&dense_map(&k.expand(), &p), &blr.densify().unwrap()) <= 1e-12);
        let wide = KruskalRep::new(random_matrix(4, 5, 1), random_matrix(3, 5, 2), random_matrix(5, 5, 3)).unwrap();
        assert!(matches!(blr_from_kruskal(&wide, &p), Err(Error::RankOutOfRange { .. })));
    }

    #[test]
    fn truncated_error_equals_tensor_error() {
        let p = toeplitz(4, 3, 3);
        let a = random_conforming(&p, 9);
        let bm = BlockMatrix::from_dense(&a, 3, 3).unwrap();
        let t = mat_to_tensor_dense(&a, &p).unwrap();
        let rep = hosvd(&t, &[2, 3, 2]).unwrap();
        let ten_err = rep.reconstruct().unwrap().distance(&t).unwrap() / a.norm();
        let ks = kron_sum_from_tucker(&rep, &p).unwrap();
        let blr = blr_from_tucker(&rep, &p).unwrap();
        assert!((ks.error_fro(&bm).unwrap() - ten_err).abs() <= 1e-12);
        assert!((blr.error_fro(&bm).unwrap() - ten_err).abs() <= 1e-12);
        let dense_err = (&a - ks.densify().unwrap()).norm() / a.norm();
        assert!((dense_err - ten_err).abs() <= 1e-12);
        let expect = tensor_to_mat_dense(&rep.reconstruct().unwrap(), &p).unwrap();
        assert!(rel(&expect, &ks.densify().unwrap()) <= 1e-12);
        assert!(rel(&ks.densify().unwrap(), &blr.densify().unwrap()) <= 1e-12);
    }

    #[test]
    fn single_term_densify_is_a_kronecker_product() {
        let p = toeplitz(3, 2, 2);
        let d = random_matrix(2, 2, 5);
        let coeffs = vec![0.3, -1.0, 0.0, 2.0, 0.5];
        let ks = KronSumRep::new(p.clone(), vec![KronTerm { coeffs: coeffs.clone(), d: d.clone() }]).unwrap();
        let mut c = Matrix::zeros(3, 3);
        for (k, v) in coeffs.iter().enumerate() {
            c += p.placement(k) * *v;
        }
        assert!(rel(&c.kronecker(&d), &ks.densify().unwrap()) <= 1e-14);
    }

    #[test]
    fn guard_and_length_errors() {
        let p = BlockPattern::build(StructureClass::Diagonal, 20_000, 20_000, 1, 1).unwrap();
        let ks = KronSumRep::new(p.clone(), vec![KronTerm { coeffs: vec![1.0; p.p()], d: Matrix::identity(1, 1) }])
            .unwrap();
        assert!(matches!(ks.densify(), Err(Error::SizeGuard { .. })));
        assert!(ks.to_block_matrix().is_ok());
        assert!(ks.matvec(&[1.0]).is_err());
    }

    #[test]
    fn flop_count_is_linear_in_terms() {
        let p = toeplitz(6, 4, 4);
        let make = |r: usize| {
            let terms = (0..r)
                .map(|j| KronTerm { coeffs: vec![1.0; p.p()], d: random_matrix(4, 4, j as u64) })
                .collect();
            KronSumRep::new(p.clone(), terms).unwrap()
        };
        let x = vec![1.0; 24];
        let f1 = make(1).matvec_counted(&x).unwrap().1;
        for r in 2..6 {
            assert_eq!(make(r).matvec_counted(&x).unwrap().1, f1 * r as u64);
        }
        // 2mnq for D_j X plus 2m per nonzero of C_j
        assert_eq!(f1, (2 * 4 * 4 * 6 + 2 * 4 * 36) as u64);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn matvec_matches_densified(l in 1usize..5, m in 1usize..4, n in 1usize..4, r in 1usize..4, seed in 0u64..500) {
            let p = toeplitz(l, m, n);
            let k = KruskalRep::new(
                random_matrix(m, r, seed),
                random_matrix(p.p(), r, seed + 1),
                random_matrix(n, r, seed + 2),
            ).unwrap();
            let x: Vec<f64> = random_matrix(l * n, 1, seed + 3).as_slice().to_vec();
            let ks = kron_sum_from_kruskal(&k, &p, CpSplit::Identity).unwrap();
            let dense = ks.densify().unwrap();
            prop_assert!(vec_rel(&ks.matvec(&x).unwrap(), &matvec_dense(&dense, &x)) <= 1e-12);
            prop_assert!(rel(&dense_sum(&ks), &dense) <= 1e-12);
            if r <= m.min(n) {
                let blr = blr_from_kruskal(&k, &p).unwrap();
                let bd = blr.densify().unwrap();
                prop_assert!(rel(&dense, &bd) <= 1e-12);
                prop_assert!(vec_rel(&blr.matvec(&x).unwrap(), &matvec_dense(&bd, &x)) <= 1e-12);
            }
        }

        #[test]
        fn tucker_routes_agree(l in 2usize..5, seed in 0u64..500) {
            let p = BlockPattern::build(StructureClass::Hankel, l, l, 3, 2).unwrap();
            let a = random_conforming(&p, seed);
            let t = mat_to_tensor_dense(&a, &p).unwrap();
            let rep = hosvd(&t, &[2, 2, 2]).unwrap();
            let ks = kron_sum_from_tucker(&rep, &p).unwrap().densify().unwrap();
            let blr = blr_from_tucker(&rep, &p).unwrap().densify().unwrap();
            prop_assert!(rel(&ks, &blr) <= 1e-12);
            let bm = struct_assemble(&p, &crate::pattern::tensor_to_blocks(&rep.reconstruct().unwrap(), &p).unwrap()).unwrap();
            prop_assert!(rel(&bm.to_dense().unwrap(), &ks) <= 1e-12);
        }
    }
}
