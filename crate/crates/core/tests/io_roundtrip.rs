use std::io::Cursor;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tensor_flattenings::tensor::{flatten, sample_tensor, word_eval, MultiIndexCodec};
use tensor_flattenings::{FlatMatrix, Letter, Permutation, RandomTensor, Tensor, TensorModel, Word};

#[test]
fn tensor_binary_round_trip() {
    let t: RandomTensor = sample_tensor(&TensorModel::ComplexGinibre, 3, 2, 9).unwrap();
    let mut buf = Vec::new();
    t.write_binary(&mut buf).unwrap();
    assert_eq!(&buf[..4], b"TFTN");
    let back = Tensor::<f64>::read_binary(&mut Cursor::new(buf)).unwrap();
    assert_eq!(back, t);
}

#[test]
fn matrix_binary_round_trip_and_bad_magic() {
    let t: RandomTensor = sample_tensor(&TensorModel::RealGinibre, 2, 2, 1).unwrap();
    let m = flatten(&t, &Permutation::identity(4)).unwrap();
    let mut buf = Vec::new();
    m.write_binary(&mut buf).unwrap();
    assert_eq!(FlatMatrix::read_binary(&mut Cursor::new(buf.clone())).unwrap(), m);
    buf[0] = b'X';
    assert!(FlatMatrix::read_binary(&mut Cursor::new(buf)).is_err());
}

#[test]
fn csv_headers() {
    let t: RandomTensor = sample_tensor(&TensorModel::ComplexGinibre, 2, 1, 0).unwrap();
    let csv = t.to_csv().unwrap();
    assert_eq!(csv.lines().next(), Some("i1,i2,re,im"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn models_round_trip_through_text_and_json() {
    for s in ["complex-ginibre", "real-ginibre", "diluted:p=0.25,base=rademacher"] {
        let m: TensorModel = s.parse().unwrap();
        assert_eq!(m.to_string().parse::<TensorModel>().unwrap(), m);
        let j = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<TensorModel>(&j).unwrap(), m);
    }
    assert!("diluted:p=2,base=rademacher".parse::<TensorModel>().is_err());
}

#[test]
fn sampling_is_reproducible_and_real_model_is_real() {
    let a: RandomTensor = sample_tensor(&TensorModel::RealGinibre, 3, 2, 5).unwrap();
    let b: RandomTensor = sample_tensor(&TensorModel::RealGinibre, 3, 2, 5).unwrap();
    let c: RandomTensor = sample_tensor(&TensorModel::RealGinibre, 3, 2, 6).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.data().iter().all(|z| z.im == 0.0));
}

#[test]
fn identity_flattening_reads_rows_then_columns() {
    let (n, k) = (3, 2);
    let t = Tensor::<f64>::from_fn(n, k, |idx| {
        Complex64::new(idx.iter().fold(0usize, |acc, &i| 10 * acc + i + 1) as f64, 0.0)
    })
    .unwrap();
    let m = flatten(&t, &Permutation::identity(2 * k)).unwrap();
    let codec = MultiIndexCodec::new(n, k);
    for r in 0..9 {
        for c in 0..9 {
            let mut idx = codec.decode(r);
            idx.extend(codec.decode(c));
            assert_eq!(m.get(r, c), t.get(&idx));
        }
    }
}

#[test]
fn word_eval_agrees_with_absorbed_letters() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let t: RandomTensor = sample_tensor(&TensorModel::ComplexGinibre, 2, 2, 3).unwrap();
    let letters: Vec<Letter> = vec![
        Letter::one(Permutation::random(4, &mut rng)),
        Letter::star(Permutation::random(4, &mut rng)),
        Letter::one(Permutation::random(4, &mut rng)),
    ];
    let etas: Vec<Permutation> = (0..3).map(|_| Permutation::random(2, &mut rng)).collect();
    let w = Word::new(2, letters, etas).unwrap();
    let plain = Word::plain(2, w.absorbed()).unwrap();
    let d = word_eval(&t, &w).unwrap().max_abs_diff(&word_eval(&t, &plain).unwrap());
    assert!(d < 1e-13);
}
