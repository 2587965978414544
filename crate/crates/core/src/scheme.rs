//! End-to-end secure transmission over an atomic network and exact
//! verification against a passive eavesdropper.
//!
//! An eavesdropper on edge set `Z` sees every coded packet whose path
//! crosses `Z`. Each observed packet is an affine function `a.X + b.W` of the
//! uniform keys `X` and messages `W`, so the observations leak
//! `rank([A|B]) - rank(A)` message symbols per payload position. Zero means
//! the observations are independent of `W`.

use std::collections::{BTreeSet, HashMap, HashSet};

use itertools::Itertools;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::scheme_rate;
use crate::coding::{decode, CodedTransmission, Packet};
use crate::error::{Error, Result};
use crate::field::{Field, Symbol};
use crate::matrix::Matrix;
use crate::network::{check_121_schedule, expand, AtomicNetworkSpec, EdgeId, ExpandedGraph, PathId};
use crate::packing::{build_schedule, RoundSchedule};
use crate::rate::Rate;

pub const TRANSCRIPT_VERSION: u32 = 1;
pub const DEFAULT_PAYLOAD_LEN: usize = 64;
pub const DEFAULT_SWEEP_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeParams {
    /// Eavesdropper budget, which is also the number of random key packets.
    pub k: usize,
    pub c: usize,
    pub seed: u64,
    pub payload_len: usize,
    pub field: Field,
}

impl SchemeParams {
    pub fn new(k: usize, c: usize, seed: u64) -> Self {
        Self {
            k,
            c,
            seed,
            payload_len: DEFAULT_PAYLOAD_LEN,
            field: Field::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HopRecord {
    pub edge: EdgeId,
    pub packet: usize,
}

/// One time slot: a group of vertex-disjoint paths, each carrying one packet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkUse {
    pub round: usize,
    pub group: Vec<PathId>,
    pub hops: Vec<HopRecord>,
}

/// How coded packet `index` depends on keys and messages:
/// `T = key_coeffs . X (+ W[message])`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PacketRecord {
    pub index: usize,
    pub key_coeffs: Vec<Symbol>,
    pub message: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub version: u32,
    pub spec: AtomicNetworkSpec,
    #[serde(rename = "K")]
    pub k: usize,
    pub c: usize,
    pub seed: u64,
    pub field: Field,
    pub payload_len: usize,
    pub schedule: RoundSchedule,
    pub uses: Vec<NetworkUse>,
    pub packets: Vec<PacketRecord>,
    pub coding: CodedTransmission,
    pub packets_hash: String,
    #[serde(default)]
    pub notes: Vec<String>,
}

fn packets_hash(coding: &CodedTransmission) -> String {
    let mut hasher = Sha256::new();
    for p in coding.x.iter().chain(&coding.w).chain(&coding.t) {
        for s in p {
            hasher.update(s.to_le_bytes());
        }
    }
    hex::encode(hasher.finalize())
}

/// Runs key generation, encoding, scheduling and transmission for rounds
/// `0..=c`.
///
/// `N` is the number of scheduled paths. When `N <= K` no message fits and
/// only keys are sent.
pub fn run_scheme(spec: &AtomicNetworkSpec, params: &SchemeParams) -> Result<Transcript> {
    let schedule = build_schedule(spec, params.c)?;
    let n = schedule.scheduled_paths();
    let keys = params.k.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let coding = CodedTransmission::generate(n, keys, params.field, params.payload_len, &mut rng)?;

    let mut notes = Vec::new();
    if params.k >= n {
        notes.push(format!("N = {n} <= K = {}: no message packets", params.k));
    }
    if params.k == 0 {
        notes.push("K = 0: messages are sent without keys".into());
    }

    let mut next = 0;
    let uses = schedule
        .groups()
        .map(|(round, group)| {
            let hops = group
                .iter()
                .flat_map(|&p| {
                    let packet = next;
                    next += 1;
                    (0..EdgeId::HOPS).map(move |hop| HopRecord {
                        edge: EdgeId::new(p, hop),
                        packet,
                    })
                })
                .collect();
            NetworkUse {
                round,
                group: group.to_vec(),
                hops,
            }
        })
        .collect();

    let packets = (0..n)
        .map(|i| PacketRecord {
            index: i,
            key_coeffs: coding.v.row(i).to_vec(),
            message: i.checked_sub(keys),
        })
        .collect();

    Ok(Transcript {
        version: TRANSCRIPT_VERSION,
        spec: spec.clone(),
        k: params.k,
        c: params.c,
        seed: params.seed,
        field: params.field,
        payload_len: params.payload_len,
        packets_hash: packets_hash(&coding),
        schedule,
        uses,
        packets,
        coding,
        notes,
    })
}

impl Transcript {
    pub fn from_json(s: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(s).map_err(|e| Error::MalformedTranscript(e.to_string()))?;
        let version = value
            .get("version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::MalformedTranscript("missing version".into()))?;
        if version != TRANSCRIPT_VERSION as u64 {
            return Err(Error::SchemaVersion {
                found: version as u32,
                expected: TRANSCRIPT_VERSION,
            });
        }
        serde_json::from_value(value).map_err(|e| Error::MalformedTranscript(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript serialization is infallible")
    }

    pub fn graph(&self) -> ExpandedGraph {
        expand(&self.spec)
    }

    pub fn packet_count(&self) -> usize {
        self.packets.len()
    }

    pub fn message_count(&self) -> usize {
        self.coding.w.len()
    }

    pub fn key_count(&self) -> usize {
        self.coding.v.k()
    }

    pub fn network_uses(&self) -> usize {
        self.uses.len()
    }

    /// Packet carried by each path that is used.
    pub fn path_packets(&self) -> HashMap<PathId, usize> {
        self.uses
            .iter()
            .flat_map(|u| u.hops.iter())
            .map(|h| (h.edge.path, h.packet))
            .collect()
    }

    /// What the destination receives on its incoming edges, by packet index.
    pub fn received_packets(&self) -> Vec<Option<Packet>> {
        let mut out = vec![None; self.packet_count()];
        for hop in self.uses.iter().flat_map(|u| &u.hops) {
            if hop.edge.hop == EdgeId::HOPS - 1 {
                if let (Some(slot), Some(t)) = (out.get_mut(hop.packet), self.coding.t.get(hop.packet)) {
                    *slot = Some(t.clone());
                }
            }
        }
        out
    }

    /// Decodes the messages from the packets arriving at the destination.
    pub fn destination_decode(&self) -> Result<Vec<Packet>> {
        decode(&self.received_packets(), &self.coding.v)
    }

    /// Structural checks; returns one line per violation.
    pub fn validate(&self) -> Vec<String> {
        let mut issues = Vec::new();
        let graph = self.graph();
        let m_hat = self.spec.m_hat();
        let n = self.packets.len();

        if self.uses.len() != self.schedule.network_uses() {
            issues.push(format!(
                "{} network uses but the schedule has {} groups",
                self.uses.len(),
                self.schedule.network_uses()
            ));
        }
        for (k, (u, (round, group))) in self.uses.iter().zip(self.schedule.groups()).enumerate() {
            if u.round != round || u.group != group {
                issues.push(format!("use {k} does not follow the schedule"));
            }
        }

        let mut expected_packet = 0;
        let mut seen_paths = HashSet::new();
        for (k, u) in self.uses.iter().enumerate() {
            let budget = m_hat.saturating_sub(u.round);
            if u.group.len() != budget {
                issues.push(format!("use {k} has {} paths, round budget is {budget}", u.group.len()));
            }
            match check_121_schedule(&graph, &u.group, budget) {
                Ok(true) => {}
                Ok(false) => issues.push(format!("use {k} violates the 1-2-1 constraint")),
                Err(e) => issues.push(format!("use {k}: {e}")),
            }
            for &p in &u.group {
                if !seen_paths.insert(p) {
                    issues.push(format!("path {p} is used more than once"));
                }
                let hops: Vec<&HopRecord> = u.hops.iter().filter(|h| h.edge.path == p).collect();
                let hop_ids: BTreeSet<u8> = hops.iter().map(|h| h.edge.hop).collect();
                if hops.len() != EdgeId::HOPS as usize || hop_ids.len() != EdgeId::HOPS as usize {
                    issues.push(format!("path {p} in use {k} does not record all four hops"));
                }
                let carried: BTreeSet<usize> = hops.iter().map(|h| h.packet).collect();
                if carried.len() != 1 {
                    issues.push(format!("path {p} carries {} different packets", carried.len()));
                } else if carried.first() != Some(&expected_packet) {
                    issues.push(format!("path {p} is out of sequence (expected T{})", expected_packet + 1));
                }
                expected_packet += 1;
            }
            if u.hops.iter().any(|h| !u.group.contains(&h.edge.path)) {
                issues.push(format!("use {k} records hops outside its group"));
            }
        }

        if n != self.schedule.scheduled_paths() || n != self.coding.t.len() {
            issues.push(format!(
                "{n} packet records, {} scheduled paths, {} coded packets",
                self.schedule.scheduled_paths(),
                self.coding.t.len()
            ));
        }
        let mut messages = HashSet::new();
        for (i, p) in self.packets.iter().enumerate() {
            if p.index != i {
                issues.push(format!("packet record {i} has index {}", p.index));
            }
            if p.key_coeffs.len() != self.key_count() {
                issues.push(format!("packet {i} has {} key coefficients", p.key_coeffs.len()));
            }
            if let Some(m) = p.message {
                if m >= self.message_count() || !messages.insert(m) {
                    issues.push(format!("packet {i} refers to message {m}"));
                }
            }
        }
        if packets_hash(&self.coding) != self.packets_hash {
            issues.push("packets_hash does not match the packet contents".into());
        }
        issues
    }

    /// Test fixture: strips the key from message packet `index` so it is
    /// sent in the clear.
    pub fn expose_message(&mut self, index: usize) -> Result<()> {
        let record = self.packets.get_mut(index).ok_or(Error::MissingPacket(index))?;
        let m = record
            .message
            .ok_or_else(|| Error::InvalidDimensions(format!("T{} carries no message", index + 1)))?;
        record.key_coeffs.iter_mut().for_each(|c| *c = 0);
        self.coding.t[index] = self.coding.w[m].clone();
        self.packets_hash = packets_hash(&self.coding);
        Ok(())
    }
}

/// Coefficients of what an eavesdropper sees: `observed = A X + B W`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub packets: Vec<usize>,
    pub a: Matrix,
    pub b: Matrix,
}

fn observe_packets(t: &Transcript, packets: &[usize]) -> Observation {
    let field = t.field;
    let keys = t.key_count();
    let msgs = t.message_count();
    let a_rows: Vec<Vec<Symbol>> = packets.iter().map(|&i| t.packets[i].key_coeffs.clone()).collect();
    let b_rows: Vec<Vec<Symbol>> = packets
        .iter()
        .map(|&i| {
            let mut row = vec![0; msgs];
            if let Some(m) = t.packets[i].message {
                row[m] = 1;
            }
            row
        })
        .collect();
    Observation {
        packets: packets.to_vec(),
        a: Matrix::from_rows(field, keys, &a_rows),
        b: Matrix::from_rows(field, msgs, &b_rows),
    }
}

fn edge_packets(t: &Transcript) -> HashMap<EdgeId, usize> {
    t.uses
        .iter()
        .flat_map(|u| u.hops.iter())
        .map(|h| (h.edge, h.packet))
        .collect()
}

/// The affine system observed on edge set `z`. Edges of unused paths carry
/// nothing; repeated sightings of a packet give one row.
pub fn eavesdrop(t: &Transcript, z: &[EdgeId]) -> Result<Observation> {
    let graph = t.graph();
    let carried = edge_packets(t);
    let mut packets = BTreeSet::new();
    for &e in z {
        if !graph.contains_edge(e) {
            return Err(Error::UnknownEdge(e));
        }
        if let Some(&p) = carried.get(&e) {
            packets.insert(p);
        }
    }
    let packets: Vec<usize> = packets.into_iter().collect();
    Ok(observe_packets(t, &packets))
}

/// Message symbols leaked per payload position: `rank([A|B]) - rank(A)`.
pub fn leakage(a: &Matrix, b: &Matrix) -> usize {
    a.hstack(b).rank() - a.rank()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub adversary_set: Vec<EdgeId>,
    pub observed_packets: Vec<usize>,
    pub leaked_symbols: usize,
    pub secure: bool,
}

impl LeakageReport {
    fn new(adversary_set: Vec<EdgeId>, observed_packets: Vec<usize>, leaked_symbols: usize) -> Self {
        Self {
            adversary_set,
            observed_packets,
            leaked_symbols,
            secure: leaked_symbols == 0,
        }
    }
}

pub fn leakage_report(t: &Transcript, z: &[EdgeId]) -> Result<LeakageReport> {
    let obs = eavesdrop(t, z)?;
    let leaked = leakage(&obs.a, &obs.b);
    Ok(LeakageReport::new(z.to_vec(), obs.packets, leaked))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Every edge set of the budget size; fails above the cap.
    Exhaustive,
    /// Every path set of the budget size.
    PathLevel,
    /// Edge level when it fits under the cap, else path level.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepLevel {
    Edge,
    Path,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    pub level: SweepLevel,
    /// Edges per adversary set: `min(K, |E|)`.
    pub budget: usize,
    pub sets_checked: u128,
    pub distinct_observations: usize,
    pub worst: LeakageReport,
    pub secure: bool,
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Maximum leakage over every eavesdropper set of `k` edges.
///
/// Every edge of a path carries the same packet, so the path-level sweep
/// over `min(k, H_e)` paths reaches the same maximum with far fewer sets.
pub fn adversary_sweep(t: &Transcript, k: usize, mode: SweepMode, cap: u128) -> Result<SweepReport> {
    let graph = t.graph();
    let edges: Vec<EdgeId> = graph.edges().iter().map(|e| e.id).collect();
    let budget = k.min(edges.len());
    let edge_sets = binomial(edges.len(), budget);
    let path_sets = binomial(graph.paths().len(), budget.min(graph.paths().len()));
    let level = match mode {
        SweepMode::Exhaustive if edge_sets > cap => {
            return Err(Error::SweepCapExceeded { needed: edge_sets, cap })
        }
        SweepMode::Exhaustive => SweepLevel::Edge,
        SweepMode::Auto if edge_sets <= cap => SweepLevel::Edge,
        SweepMode::PathLevel | SweepMode::Auto if path_sets > cap => {
            return Err(Error::SweepCapExceeded { needed: path_sets, cap })
        }
        SweepMode::PathLevel | SweepMode::Auto => SweepLevel::Path,
    };
    match level {
        SweepLevel::Edge => Ok(sweep_edges(t, &edges, budget)),
        SweepLevel::Path => Ok(sweep_paths(t, &graph, budget)),
    }
}

struct LeakCache<'a> {
    transcript: &'a Transcript,
    seen: HashMap<Vec<usize>, usize>,
}

impl LeakCache<'_> {
    fn leak(&mut self, packets: &[usize]) -> usize {
        if let Some(&v) = self.seen.get(packets) {
            return v;
        }
        let obs = observe_packets(self.transcript, packets);
        let v = leakage(&obs.a, &obs.b);
        self.seen.insert(packets.to_vec(), v);
        v
    }
}

fn sweep_edges(t: &Transcript, edges: &[EdgeId], budget: usize) -> SweepReport {
    let carried = edge_packets(t);
    let packet_of: Vec<Option<usize>> = edges.iter().map(|e| carried.get(e).copied()).collect();
    let mut cache = LeakCache {
        transcript: t,
        seen: HashMap::new(),
    };
    let mut checked: u128 = 0;
    let mut worst: Option<(usize, Vec<usize>, Vec<usize>)> = None;
    for combo in (0..edges.len()).combinations(budget) {
        checked += 1;
        let mut packets: Vec<usize> = combo.iter().filter_map(|&e| packet_of[e]).collect();
        packets.sort_unstable();
        packets.dedup();
        let leaked = cache.leak(&packets);
        if worst.as_ref().is_none_or(|w| leaked > w.0) {
            worst = Some((leaked, combo, packets));
        }
    }
    let (leaked, combo, packets) = worst.expect("at least one edge set");
    let z = combo.into_iter().map(|e| edges[e]).collect();
    SweepReport {
        level: SweepLevel::Edge,
        budget,
        sets_checked: checked,
        distinct_observations: cache.seen.len(),
        worst: LeakageReport::new(z, packets, leaked),
        secure: leaked == 0,
    }
}

fn sweep_paths(t: &Transcript, graph: &ExpandedGraph, budget: usize) -> SweepReport {
    let carried = t.path_packets();
    let paths = graph.paths();
    let size = budget.min(paths.len());
    let mut cache = LeakCache {
        transcript: t,
        seen: HashMap::new(),
    };
    let mut checked: u128 = 0;
    let mut worst: Option<(usize, Vec<usize>, Vec<usize>)> = None;
    for combo in (0..paths.len()).combinations(size) {
        checked += 1;
        let mut packets: Vec<usize> = combo.iter().filter_map(|&p| carried.get(&paths[p]).copied()).collect();
        packets.sort_unstable();
        packets.dedup();
        let leaked = cache.leak(&packets);
        if worst.as_ref().is_none_or(|w| leaked > w.0) {
            worst = Some((leaked, combo, packets));
        }
    }
    let (leaked, combo, packets) = worst.expect("at least one path set");
    // realize the path set as `budget` concrete edges, first hops first
    let z: Vec<EdgeId> = (0..EdgeId::HOPS)
        .flat_map(|hop| combo.iter().map(move |&p| EdgeId::new(paths[p], hop)))
        .take(budget)
        .collect();
    SweepReport {
        level: SweepLevel::Path,
        budget,
        sets_checked: checked,
        distinct_observations: cache.seen.len(),
        worst: LeakageReport::new(z, packets, leaked),
        secure: leaked == 0,
    }
}

/// `(N - K)^+` message packets over the number of network uses.
pub fn empirical_rate(t: &Transcript) -> Rate {
    scheme_rate(&t.schedule, t.k)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub issues: Vec<String>,
    pub decoded: bool,
    pub rate: Rate,
    pub network_uses: usize,
    pub sweep: SweepReport,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.issues.is_empty() && self.decoded && self.sweep.secure
    }
}

/// Structure, reliability and secrecy checks on a transcript at budget `k`.
pub fn verify_transcript(t: &Transcript, k: usize, mode: SweepMode, cap: u128) -> Result<VerifyReport> {
    let issues = t.validate();
    let decoded = t
        .destination_decode()
        .map(|w| w == t.coding.w)
        .unwrap_or(false);
    let sweep = adversary_sweep(t, k, mode, cap)?;
    Ok(VerifyReport {
        issues,
        decoded,
        rate: empirical_rate(t),
        network_uses: t.network_uses(),
        sweep,
    })
}
