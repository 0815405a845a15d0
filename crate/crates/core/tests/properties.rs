use proptest::prelude::*;

use rpcap_core::capacity::{blahut_arimoto, objective_causal, objective_causal_via_virtual};
use rpcap_core::mtypes::{enumerate_types, index_to_sequence, sequence_to_index, type_class_size};
use rpcap_core::protosim::{sqrt_measurement, u_of_gamma, EntangledResource, GammaVector};
use rpcap_core::qcore::{partial_trace, tensor_product, CMatrix};
use rpcap_core::quantum::random::{haar_unitary, random_channel, random_density, random_pure_state};
use rpcap_core::quantum::{heisenberg_weyl, mutual_info, purify, ricochet_check, vn_entropy, DensityOperator};
use rpcap_core::rng::stream;
use rpcap_core::rpchannel::{parse_spec, to_canonical_json, EncoderFamily, RandomParameterChannel};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn twirl_is_maximally_mixed(seed in any::<u64>(), d in 2usize..=5) {
        let rho = random_density(&mut stream(seed, "prop", 0), d, d);
        let mut acc = CMatrix::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                acc = &acc + &heisenberg_weyl(d, a, b).unwrap().sandwich(rho.matrix());
            }
        }
        let pi = CMatrix::identity(d).scale_real(1.0 / d as f64);
        prop_assert!(acc.scale_real(1.0 / (d * d) as f64).max_abs_diff(&pi) < 1e-10);
    }

    #[test]
    fn entropy_is_bounded(seed in any::<u64>(), d in 1usize..=6, rank in 1usize..=6) {
        let rho = random_density(&mut stream(seed, "prop", 1), d, rank);
        let s = vn_entropy(&rho).unwrap();
        prop_assert!(s >= -1e-12);
        prop_assert!(s <= (d.min(rank) as f64).log2() + 1e-9);
    }

    #[test]
    fn mutual_info_is_local_unitary_invariant(seed in any::<u64>(), da in 2usize..=3, db in 2usize..=3) {
        let mut rng = stream(seed, "prop", 2);
        let rho = random_density(&mut rng, da * db, 2);
        let u = tensor_product(&haar_unitary(&mut rng, da), &haar_unitary(&mut rng, db));
        let rotated = DensityOperator::new(u.sandwich(rho.matrix()).hermitian_part()).unwrap();
        let (a, b) = (mutual_info(&rho, da, db).unwrap(), mutual_info(&rotated, da, db).unwrap());
        prop_assert!((a - b).abs() < 1e-9);
        prop_assert!(a >= 0.0 && a <= 2.0 * (da.min(db) as f64).log2() + 1e-9);
    }

    #[test]
    fn partial_trace_recovers_factors(seed in any::<u64>(), da in 1usize..=3, db in 1usize..=3) {
        let mut rng = stream(seed, "prop", 3);
        let (a, b) = (random_density(&mut rng, da, da), random_density(&mut rng, db, db));
        let ab = tensor_product(a.matrix(), b.matrix());
        prop_assert!(partial_trace(&ab, &[da, db], &[0]).unwrap().max_abs_diff(a.matrix()) < 1e-12);
        prop_assert!(partial_trace(&ab, &[da, db], &[1]).unwrap().max_abs_diff(b.matrix()) < 1e-12);
    }

    #[test]
    fn purification_round_trips(seed in any::<u64>(), d in 1usize..=4, rank in 1usize..=4) {
        let rho = random_density(&mut stream(seed, "prop", 4), d, rank);
        let p = purify(&rho).unwrap();
        prop_assert!(p.dim_ref <= rank.min(d));
        let back = partial_trace(p.state.density().matrix(), &[p.dim_a, p.dim_ref], &[0]).unwrap();
        prop_assert!(back.max_abs_diff(rho.matrix()) < 1e-9);
    }

    #[test]
    fn ricochet_holds_for_haar_unitaries(seed in any::<u64>(), d in 2usize..=4) {
        let u = haar_unitary(&mut stream(seed, "prop", 5), d);
        prop_assert!(ricochet_check(&u, d).unwrap() < 1e-12);
    }

    #[test]
    fn block_ricochet_on_nonuniform_resource(seed in any::<u64>(), n in 1usize..=2) {
        let mut rng = stream(seed, "prop", 6);
        let xi = random_pure_state(&mut rng, 4);
        let r = EntangledResource::new(&xi, 2).unwrap();
        let layout = r.layout(n).unwrap();
        let u = u_of_gamma(&GammaVector::random(&mut rng, &layout), &layout).unwrap();
        let v = r.power_vector(n).unwrap();
        let id = CMatrix::identity(1 << n);
        let left = tensor_product(&r.key_operator(&u, n), &id).apply(&v);
        let right = tensor_product(&id, &r.bob_operator(&u, n)).apply(&v);
        let res: f64 = left.iter().zip(&right).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(res < 1e-10);
    }

    #[test]
    fn causal_objective_paths_agree(seed in any::<u64>()) {
        let mut rng = stream(seed, "prop", 7);
        let rp = RandomParameterChannel::unlabelled(
            "random",
            vec![0.3, 0.7],
            vec![random_channel(&mut rng, 2, 2, 2), random_channel(&mut rng, 2, 2, 2)],
        ).unwrap();
        let fam = EncoderFamily::new(vec![random_channel(&mut rng, 2, 2, 1), random_channel(&mut rng, 2, 2, 2)]).unwrap();
        let theta = random_density(&mut rng, 4, 2);
        let a = objective_causal(&theta, &fam, &rp).unwrap();
        let b = objective_causal_via_virtual(&theta, &fam, &rp).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn square_root_measurement_is_complete(seed in any::<u64>(), count in 1usize..=5) {
        let mut rng = stream(seed, "prop", 8);
        let signals: Vec<CMatrix> = (0..count).map(|_| random_density(&mut rng, 3, 1).matrix().clone()).collect();
        let povm = sqrt_measurement(&signals).unwrap();
        prop_assert_eq!(povm.len(), count + 1);
        let total = povm.elements().iter().fold(CMatrix::zeros(3, 3), |acc, e| &acc + e);
        prop_assert!(total.max_abs_diff(&CMatrix::identity(3)) < 1e-8);
    }

    #[test]
    fn capacity_of_dmc_is_bounded(rows in prop::collection::vec(prop::collection::vec(0.01f64..1.0, 3), 2..=4)) {
        let w: Vec<Vec<f64>> = rows.iter().map(|r| { let s: f64 = r.iter().sum(); r.iter().map(|v| v / s).collect() }).collect();
        let cap = blahut_arimoto(&w, 1e-10);
        prop_assert!(cap >= -1e-12);
        prop_assert!(cap <= (w.len().min(3) as f64).log2() + 1e-9);
    }

    #[test]
    fn sequence_indexing_round_trips(index in 0usize..243) {
        let seq = index_to_sequence(index, 3, 5);
        prop_assert_eq!(sequence_to_index(&seq, 3), index);
    }
}

#[test]
fn type_classes_partition_sequences() {
    for (n, k) in [(4, 2), (3, 3), (5, 3)] {
        let total: u128 = enumerate_types(n, k).iter().map(|t| type_class_size(t).unwrap()).sum();
        assert_eq!(total, (k as u128).pow(n as u32));
    }
}

#[test]
fn channel_spec_survives_a_file_round_trip() {
    let mut rng = stream(11, "prop", 9);
    let rp = RandomParameterChannel::unlabelled(
        "round-trip",
        vec![0.25, 0.75],
        vec![random_channel(&mut rng, 2, 3, 2), random_channel(&mut rng, 2, 3, 3)],
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ch.json");
    rpcap_core::rpchannel::save_spec(&rp, &path).unwrap();
    let back = rpcap_core::rpchannel::load_spec(&path).unwrap();
    assert_eq!(to_canonical_json(&back), to_canonical_json(&rp));
    assert_eq!(to_canonical_json(&parse_spec(&to_canonical_json(&rp)).unwrap()), to_canonical_json(&rp));
}

fn h2(p: f64) -> f64 {
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// `F_0 = 1`, `F_1` = full dephasing, `θ = |+⟩⟨+| ⊗ |0⟩⟨0|`, `q = (½, ½)`.
/// Before extension `ω_A ∈ {|+⟩⟨+|, 1/2}`: `I(A;S) = h(1/4) − 1/2`.
/// After it `ω_AE ∈ {|+,0⟩, Φ}` are pure with overlap `1/2`: `I = h(1/4)`.
#[test]
fn isometric_extension_can_raise_parameter_information() {
    use rpcap_core::capacity::objective_noncausal;
    use rpcap_core::quantum::{KrausChannel, PureState};
    let dephase =
        KrausChannel::new(2, 2, vec![CMatrix::diag_real(&[1.0, 0.0]), CMatrix::diag_real(&[0.0, 1.0])]).unwrap();
    let fam = EncoderFamily::new(vec![KrausChannel::identity(2), dephase]).unwrap();
    let rp =
        RandomParameterChannel::unlabelled("identity", vec![0.5, 0.5], vec![KrausChannel::identity(2); 2]).unwrap();
    let s = 0.5f64.sqrt();
    let plus = PureState::new(vec![rpcap_core::qcore::c(s, 0.0), rpcap_core::qcore::c(s, 0.0)]).unwrap();
    let theta = plus.tensor(&PureState::basis(2, 0)).density();
    let base = objective_noncausal(&theta, &fam, &rp).unwrap();
    let wide = objective_noncausal(&theta, &fam.isometric_extension().unwrap(), &rp).unwrap();
    assert!((base.i_as - (h2(0.25) - 0.5)).abs() < 1e-9, "{base:?}");
    assert!((wide.i_as - h2(0.25)).abs() < 1e-9, "{wide:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Data processing in both terms: tracing out `E` cannot increase either
    /// mutual information.
    #[test]
    fn isometric_extension_never_lowers_either_term(seed in any::<u64>()) {
        use rpcap_core::capacity::objective_noncausal;
        let mut rng = stream(seed, "prop", 10);
        let rp = RandomParameterChannel::unlabelled(
            "random",
            vec![0.5, 0.5],
            vec![random_channel(&mut rng, 2, 2, 2), random_channel(&mut rng, 2, 2, 2)],
        ).unwrap();
        let fam = EncoderFamily::new(vec![random_channel(&mut rng, 2, 2, 2), random_channel(&mut rng, 2, 2, 3)]).unwrap();
        let theta = random_density(&mut rng, 4, 4);
        let base = objective_noncausal(&theta, &fam, &rp).unwrap();
        let wide = objective_noncausal(&theta, &fam.isometric_extension().unwrap(), &rp).unwrap();
        prop_assert!(wide.i_ab >= base.i_ab - 1e-9);
        prop_assert!(wide.i_as >= base.i_as - 1e-9);
    }
}
