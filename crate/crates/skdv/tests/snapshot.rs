use std::sync::Arc;

use proptest::prelude::*;
use skdv::snapshot::{decode, encode, read_snapshot, write_snapshot};
use skdv_core::{Complex64, FieldState, Grid, ModelParams};

fn any_finite() -> impl Strategy<Value = f64> {
    prop_oneof![any::<f64>().prop_filter("finite", |x| x.is_finite()), Just(0.0), Just(-0.0), Just(5e-324)]
}

proptest! {
    #[test]
    fn round_trip_is_bit_exact(
        half in 4usize..40,
        length in 1e-3f64..1e4,
        center in -1e3f64..1e3,
        t in any_finite(),
        abg in prop::array::uniform3(any_finite()),
        seed in prop::collection::vec(any_finite(), 240),
    ) {
        let n = 2 * half;
        let grid = Arc::new(Grid::new(n, length, center).unwrap());
        let u: Vec<Complex64> = (0..n).map(|j| Complex64::new(seed[2 * j], seed[2 * j + 1])).collect();
        let v: Vec<f64> = (0..n).map(|j| seed[160 + j % 80]).collect();
        let state = FieldState::new(grid, u, v, t).unwrap();
        let params = ModelParams::new(abg[0], abg[1], abg[2]).unwrap();
        let bytes = encode(&state, &params);
        let (back, used) = decode(&bytes, "mem").unwrap();
        prop_assert_eq!(used, bytes.len());
        prop_assert_eq!(encode(&back.state, &back.params), bytes);
        prop_assert_eq!(back.state.t.to_bits(), t.to_bits());
        prop_assert_eq!(back.state.grid.length().to_bits(), length.to_bits());
    }
}

#[test]
fn file_round_trip_and_layout() {
    let grid = Grid::shared(8, 10.0, 2.5).unwrap();
    let u = (0..8).map(|j| Complex64::new(j as f64, -(j as f64))).collect();
    let v = (0..8).map(|j| 0.5 * j as f64).collect();
    let state = FieldState::new(grid, u, v, 3.0).unwrap();
    let params = ModelParams::new(-1.0, 1.0, -0.5).unwrap();
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("layout.skdv");
    write_snapshot(&path, &state, &params).unwrap();
    let raw = std::fs::read(&path).unwrap();
    assert_eq!(&raw[..4], b"SKDV");
    assert_eq!(u32::from_le_bytes(raw[4..8].try_into().unwrap()), 1);
    assert_eq!(u64::from_le_bytes(raw[8..16].try_into().unwrap()), 8);
    assert_eq!(f64::from_le_bytes(raw[24..32].try_into().unwrap()), 2.5);
    // First (Re u, Im u) pair of node 1 and the first v value.
    assert_eq!(f64::from_le_bytes(raw[80..88].try_into().unwrap()), 1.0);
    assert_eq!(f64::from_le_bytes(raw[88..96].try_into().unwrap()), -1.0);
    assert_eq!(f64::from_le_bytes(raw[64 + 128 + 8..64 + 128 + 16].try_into().unwrap()), 0.5);
    let back = read_snapshot(&path).unwrap();
    assert_eq!(back.state.u, state.u);
    assert_eq!(back.state.v, state.v);
    std::fs::write(&path, [raw.as_slice(), &[0u8]].concat()).unwrap();
    assert!(read_snapshot(&path).is_err());
}
