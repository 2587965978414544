//! Key generation, encoding and decoding with a Vandermonde MDS matrix.
//!
//! `K` uniformly random packets `X` are expanded into `N` keys `V X`. The
//! first `K` coded packets are bare keys; packet `K + j` carries message
//! `W_j` masked by key `K + j`. Any `K` rows of `V` are independent, so any
//! `K` coded packets look uniform to an observer.

use itertools::Itertools;
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Symbol};
use crate::matrix::Matrix;

pub type Packet = Vec<Symbol>;

/// Row subsets up to this `N` are checked exhaustively by [`MdsMatrix::verify`].
pub const EXHAUSTIVE_MDS_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MdsMatrix {
    points: Vec<Symbol>,
    matrix: Matrix,
}

/// `N x K` Vandermonde matrix `V[i][j] = x_i^j` over distinct nonzero `x_i`.
pub fn make_mds(n: usize, k: usize, field: Field) -> Result<MdsMatrix> {
    if k > n {
        return Err(Error::InvalidDimensions(format!("K = {k} exceeds N = {n}")));
    }
    if n >= field.order() {
        return Err(Error::FieldTooSmall {
            n,
            field: field.to_string(),
            available: field.order() - 1,
        });
    }
    let points: Vec<Symbol> = (0..n)
        .map(|i| field.nonzero_element(i).expect("n < order"))
        .collect();
    let rows: Vec<Vec<Symbol>> = points
        .iter()
        .map(|&x| (0..k).map(|j| field.pow(x, j as u64)).collect())
        .collect();
    Ok(MdsMatrix {
        points,
        matrix: Matrix::from_rows(field, k, &rows),
    })
}

impl MdsMatrix {
    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn k(&self) -> usize {
        self.matrix.cols()
    }

    pub fn field(&self) -> Field {
        self.matrix.field()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn points(&self) -> &[Symbol] {
        &self.points
    }

    pub fn row(&self, i: usize) -> &[Symbol] {
        self.matrix.row(i)
    }

    /// Whether the `K` rows in `rows` form an invertible submatrix.
    pub fn rows_independent(&self, rows: &[usize]) -> bool {
        self.matrix.select_rows(rows).is_invertible()
    }

    /// Checks every `K`-row subset.
    pub fn verify_exhaustive(&self) -> bool {
        (0..self.n())
            .combinations(self.k())
            .all(|rows| self.rows_independent(&rows))
    }

    /// Checks `samples` random `K`-row subsets.
    pub fn verify_sampled<R: Rng>(&self, samples: usize, rng: &mut R) -> bool {
        (0..samples).all(|_| {
            let mut rows = sample(rng, self.n(), self.k()).into_vec();
            rows.sort_unstable();
            self.rows_independent(&rows)
        })
    }

    /// Exhaustive up to [`EXHAUSTIVE_MDS_LIMIT`] rows, sampled above.
    pub fn verify<R: Rng>(&self, rng: &mut R) -> bool {
        if self.n() <= EXHAUSTIVE_MDS_LIMIT {
            self.verify_exhaustive()
        } else {
            self.verify_sampled(1000, rng)
        }
    }
}

fn random_packets<R: Rng>(alphabet: usize, count: usize, len: usize, rng: &mut R) -> Vec<Packet> {
    (0..count)
        .map(|_| (0..len).map(|_| rng.random_range(0..alphabet) as Symbol).collect())
        .collect()
}

/// `V X` evaluated symbol-wise.
pub fn key_packets(v: &MdsMatrix, x: &[Packet]) -> Vec<Packet> {
    let f = v.field();
    let len = x.first().map_or(0, Vec::len);
    (0..v.n())
        .map(|i| {
            (0..len)
                .map(|s| {
                    v.row(i)
                        .iter()
                        .zip(x)
                        .fold(0, |acc, (&c, xj)| f.add(acc, f.mul(c, xj[s])))
                })
                .collect()
        })
        .collect()
}

/// Draws `K` uniform random packets and returns them with their keys.
pub fn keygen<R: Rng>(v: &MdsMatrix, payload_len: usize, rng: &mut R) -> (Vec<Packet>, Vec<Packet>) {
    let x = random_packets(v.field().order(), v.k(), payload_len, rng);
    let mut keys = key_packets(v, &x);
    if v.k() == 0 {
        keys = vec![vec![0; payload_len]; v.n()];
    }
    (x, keys)
}

/// Uniform message packets over the payload alphabet.
pub fn random_messages<R: Rng>(field: Field, count: usize, payload_len: usize, rng: &mut R) -> Vec<Packet> {
    random_packets(field.payload_alphabet(), count, payload_len, rng)
}

fn payload_len(x: &[Packet], w: &[Packet]) -> Result<usize> {
    let len = x.first().or(w.first()).map_or(0, Vec::len);
    for p in x.iter().chain(w) {
        if p.len() != len {
            return Err(Error::PayloadMismatch {
                expected: len,
                got: p.len(),
            });
        }
    }
    Ok(len)
}

/// `T_i = f_i(X)` for `i < K`, `T_i = f_i(X) + W_{i-K}` otherwise.
pub fn encode(x: &[Packet], w: &[Packet], v: &MdsMatrix) -> Result<Vec<Packet>> {
    if x.len() != v.k() {
        return Err(Error::InvalidDimensions(format!(
            "{} random packets for a code with K = {}",
            x.len(),
            v.k()
        )));
    }
    if w.len() + v.k() != v.n() {
        return Err(Error::InvalidDimensions(format!(
            "{} messages for N - K = {}",
            w.len(),
            v.n() - v.k()
        )));
    }
    let len = payload_len(x, w)?;
    let f = v.field();
    let keys = if v.k() == 0 {
        vec![vec![0; len]; v.n()]
    } else {
        key_packets(v, x)
    };
    Ok(keys
        .into_iter()
        .enumerate()
        .map(|(i, key)| match i.checked_sub(v.k()) {
            None => key,
            Some(j) => key.iter().zip(&w[j]).map(|(&a, &b)| f.add(a, b)).collect(),
        })
        .collect())
}

/// Recovers the messages from all `N` coded packets.
///
/// `received[i]` is `T_i`, or `None` if it never arrived.
pub fn decode(received: &[Option<Packet>], v: &MdsMatrix) -> Result<Vec<Packet>> {
    if received.len() != v.n() {
        return Err(Error::InvalidDimensions(format!(
            "{} packet slots for N = {}",
            received.len(),
            v.n()
        )));
    }
    let t: Vec<&Packet> = received
        .iter()
        .enumerate()
        .map(|(i, p)| p.as_ref().ok_or(Error::MissingPacket(i)))
        .collect::<Result<_>>()?;
    let k = v.k();
    let f = v.field();
    if k == 0 {
        return Ok(t.into_iter().cloned().collect());
    }
    let len = t[0].len();
    if let Some(bad) = t.iter().find(|p| p.len() != len) {
        return Err(Error::PayloadMismatch {
            expected: len,
            got: bad.len(),
        });
    }
    let head: Vec<usize> = (0..k).collect();
    let inv = v.matrix().select_rows(&head).inverse().ok_or(Error::SingularMatrix)?;
    let x: Vec<Packet> = (0..k)
        .map(|r| {
            (0..len)
                .map(|s| {
                    (0..k).fold(0, |acc, c| f.add(acc, f.mul(inv.get(r, c), t[c][s])))
                })
                .collect()
        })
        .collect();
    let keys = key_packets(v, &x);
    Ok((k..v.n())
        .map(|i| t[i].iter().zip(&keys[i]).map(|(&a, &b)| f.sub(a, b)).collect())
        .collect())
}

/// Everything the source produces before transmission.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodedTransmission {
    pub v: MdsMatrix,
    pub x: Vec<Packet>,
    pub w: Vec<Packet>,
    pub t: Vec<Packet>,
}

impl CodedTransmission {
    /// Keys, messages and coded packets for an `N x K` code.
    pub fn generate<R: Rng>(
        n: usize,
        k: usize,
        field: Field,
        payload_len: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let v = make_mds(n, k, field)?;
        let (x, _) = keygen(&v, payload_len, rng);
        let w = random_messages(field, n - k, payload_len, rng);
        let t = encode(&x, &w, &v)?;
        Ok(Self { v, x, w, t })
    }
}
