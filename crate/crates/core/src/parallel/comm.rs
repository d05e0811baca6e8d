//! Counted collectives over in-process point-to-point channels.
//!
//! Every ordered pair of workers has its own FIFO channel, so a receiver
//! that knows which worker roots the next collective always reads the
//! right message even when peers run ahead. Workers share no memory; each
//! receiver gets its own copy of every payload.

use std::sync::mpsc::{channel, Receiver, Sender};
use std::time::{Duration, Instant};

use super::ParallelError;

const F64_BYTES: usize = std::mem::size_of::<f64>();
const INDEX_BYTES: usize = std::mem::size_of::<u64>();
const ABORT_BYTES: usize = 1;
/// `|value|` plus row position.
const CANDIDATE_BYTES: usize = F64_BYTES + INDEX_BYTES;

/// Payload of a broadcast.
#[derive(Clone, Debug, PartialEq)]
pub enum Broadcast {
    /// Pivot row entries plus the pivot column index.
    Row { col: usize, values: Vec<f64> },
    /// Singularity detected; every worker stops after this collective.
    Abort,
}

impl Broadcast {
    pub fn wire_bytes(&self) -> usize {
        match self {
            Broadcast::Row { values, .. } => values.len() * F64_BYTES + INDEX_BYTES,
            Broadcast::Abort => ABORT_BYTES,
        }
    }
}

/// A pivot proposal in a global pivot search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate {
    pub abs: f64,
    /// Tie-breaking rank; lower wins on equal magnitude.
    pub pos: usize,
}

impl Candidate {
    pub(crate) fn beats(&self, other: &Candidate) -> bool {
        self.abs > other.abs || (self.abs == other.abs && self.pos < other.pos)
    }
}

#[derive(Debug)]
enum Packet {
    Broadcast(Broadcast),
    Values(Vec<f64>),
    Candidate(Option<Candidate>),
}

/// Counters kept by one endpoint. Message counters are charged to the sender.
#[derive(Clone, Debug, Default)]
pub struct EndpointStats {
    pub broadcasts: u64,
    pub broadcast_bytes: u64,
    pub gathers: u64,
    pub gather_bytes: u64,
    pub reductions: u64,
    pub reduce_bytes: u64,
    pub pivot_search_msgs: u64,
    pub pivot_search_bytes: u64,
    /// Payload length (entries) of every broadcast seen, in collective order.
    pub broadcast_lengths: Vec<usize>,
    pub comm_time: Duration,
}

/// One worker's connection to the group.
pub struct Endpoint {
    rank: usize,
    tx: Vec<Option<Sender<Packet>>>,
    rx: Vec<Option<Receiver<Packet>>>,
    stats: EndpointStats,
}

/// Creates a fully connected group of `size` endpoints, indexed by rank.
pub fn group(size: usize) -> Vec<Endpoint> {
    let mut rx: Vec<Vec<Option<Receiver<Packet>>>> = (0..size)
        .map(|_| (0..size).map(|_| None).collect())
        .collect();
    let tx: Vec<Vec<Option<Sender<Packet>>>> = (0..size)
        .map(|from| {
            (0..size)
                .map(|to| {
                    (from != to).then(|| {
                        let (s, r) = channel();
                        rx[to][from] = Some(r);
                        s
                    })
                })
                .collect()
        })
        .collect();
    tx.into_iter()
        .zip(rx)
        .enumerate()
        .map(|(rank, (tx, rx))| Endpoint {
            rank,
            tx,
            rx,
            stats: EndpointStats::default(),
        })
        .collect()
}

impl Endpoint {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn size(&self) -> usize {
        self.tx.len()
    }

    pub fn stats(&self) -> &EndpointStats {
        &self.stats
    }

    pub fn into_stats(self) -> EndpointStats {
        self.stats
    }

    fn send(&self, to: usize, packet: Packet) -> Result<(), ParallelError> {
        self.tx[to]
            .as_ref()
            .expect("no self channel")
            .send(packet)
            .map_err(|_| ParallelError::WorkerDropped { rank: to })
    }

    fn recv(&self, from: usize) -> Result<Packet, ParallelError> {
        self.rx[from]
            .as_ref()
            .expect("no self channel")
            .recv()
            .map_err(|_| ParallelError::WorkerDropped { rank: from })
    }

    fn protocol(&self, from: usize, expected: &str, got: &Packet) -> ParallelError {
        ParallelError::Protocol {
            rank: self.rank,
            detail: format!("expected {expected} from worker {from}, got {got:?}"),
        }
    }

    fn timed<T>(
        &mut self,
        f: impl FnOnce(&mut Self) -> Result<T, ParallelError>,
    ) -> Result<T, ParallelError> {
        let start = Instant::now();
        let out = f(self);
        self.stats.comm_time += start.elapsed();
        out
    }

    /// Sends `payload` from `root` to every other worker. The root passes
    /// `Some`, everyone else `None`; all get the payload back.
    pub fn broadcast(
        &mut self,
        root: usize,
        payload: Option<Broadcast>,
    ) -> Result<Broadcast, ParallelError> {
        self.timed(|ep| {
            let msg = if ep.rank == root {
                let msg = payload.expect("broadcast root must supply a payload");
                for to in (0..ep.size()).filter(|&to| to != root) {
                    ep.send(to, Packet::Broadcast(msg.clone()))?;
                }
                ep.stats.broadcasts += 1;
                ep.stats.broadcast_bytes += msg.wire_bytes() as u64;
                msg
            } else {
                match ep.recv(root)? {
                    Packet::Broadcast(msg) => msg,
                    other => return Err(ep.protocol(root, "broadcast", &other)),
                }
            };
            if let Broadcast::Row { values, .. } = &msg {
                ep.stats.broadcast_lengths.push(values.len());
            }
            Ok(msg)
        })
    }

    /// Collects one row from every worker at `root`, in rank order.
    pub fn gather(
        &mut self,
        root: usize,
        row: Vec<f64>,
    ) -> Result<Option<Vec<Vec<f64>>>, ParallelError> {
        self.timed(|ep| {
            if ep.rank != root {
                ep.stats.gather_bytes += (row.len() * F64_BYTES) as u64;
                ep.send(root, Packet::Values(row))?;
                return Ok(None);
            }
            let mut own = Some(row);
            let mut rows = Vec::with_capacity(ep.size());
            for from in 0..ep.size() {
                if from == root {
                    rows.push(own.take().unwrap());
                    continue;
                }
                match ep.recv(from)? {
                    Packet::Values(v) => rows.push(v),
                    other => return Err(ep.protocol(from, "gather row", &other)),
                }
            }
            ep.stats.gathers += 1;
            Ok(Some(rows))
        })
    }

    /// Element-wise sum at `root`, accumulated in rank order.
    pub fn reduce_sum(
        &mut self,
        root: usize,
        values: Vec<f64>,
    ) -> Result<Option<Vec<f64>>, ParallelError> {
        self.timed(|ep| {
            if ep.rank != root {
                ep.stats.reduce_bytes += (values.len() * F64_BYTES) as u64;
                ep.send(root, Packet::Values(values))?;
                return Ok(None);
            }
            let mut own = Some(values);
            let mut acc: Option<Vec<f64>> = None;
            for from in 0..ep.size() {
                let part = if from == root {
                    own.take().unwrap()
                } else {
                    match ep.recv(from)? {
                        Packet::Values(v) => v,
                        other => return Err(ep.protocol(from, "reduction operand", &other)),
                    }
                };
                match acc.as_mut() {
                    None => acc = Some(part),
                    Some(acc) => {
                        if acc.len() != part.len() {
                            return Err(ParallelError::Protocol {
                                rank: ep.rank,
                                detail: format!(
                                    "reduction length {} from worker {from}, expected {}",
                                    part.len(),
                                    acc.len()
                                ),
                            });
                        }
                        acc.iter_mut().zip(&part).for_each(|(a, b)| *a += b);
                    }
                }
            }
            ep.stats.reductions += 1;
            Ok(acc)
        })
    }

    /// Global arg-max: every worker proposes its best local candidate to
    /// `root`, which picks the winner and sends it back to all. Every message
    /// is charged to `pivot_search_msgs`.
    pub fn pivot_search(
        &mut self,
        root: usize,
        local: Option<Candidate>,
    ) -> Result<Option<Candidate>, ParallelError> {
        self.timed(|ep| {
            if ep.rank != root {
                ep.stats.pivot_search_msgs += 1;
                ep.stats.pivot_search_bytes += CANDIDATE_BYTES as u64;
                ep.send(root, Packet::Candidate(local))?;
                return match ep.recv(root)? {
                    Packet::Candidate(decision) => Ok(decision),
                    other => Err(ep.protocol(root, "pivot decision", &other)),
                };
            }
            let mut best: Option<Candidate> = None;
            for from in 0..ep.size() {
                let cand = if from == root {
                    local
                } else {
                    match ep.recv(from)? {
                        Packet::Candidate(c) => c,
                        other => return Err(ep.protocol(from, "pivot candidate", &other)),
                    }
                };
                if let Some(c) = cand {
                    if best.is_none_or(|b| c.beats(&b)) {
                        best = Some(c);
                    }
                }
            }
            for to in (0..ep.size()).filter(|&to| to != root) {
                ep.stats.pivot_search_msgs += 1;
                ep.stats.pivot_search_bytes += CANDIDATE_BYTES as u64;
                ep.send(to, Packet::Candidate(best))?;
            }
            Ok(best)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::thread;

    fn run<T: Send>(size: usize, f: impl Fn(Endpoint) -> T + Sync) -> Vec<T> {
        let f = &f;
        thread::scope(|s| {
            let handles: Vec<_> = group(size)
                .into_iter()
                .map(|ep| s.spawn(move || f(ep)))
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        })
    }

    #[test]
    fn broadcast_counts_bytes() {
        let out = run(3, |mut ep| {
            let payload = (ep.rank() == 1).then(|| Broadcast::Row {
                col: 7,
                values: vec![0.5; 100],
            });
            let got = ep.broadcast(1, payload).unwrap();
            (got, ep.into_stats())
        });
        for (got, _) in &out {
            assert_eq!(
                got,
                &Broadcast::Row {
                    col: 7,
                    values: vec![0.5; 100]
                }
            );
        }
        let total: u64 = out.iter().map(|(_, s)| s.broadcast_bytes).sum();
        let count: u64 = out.iter().map(|(_, s)| s.broadcasts).sum();
        assert_eq!((count, total), (1, 808));
        assert_eq!(Broadcast::Abort.wire_bytes(), 1);
    }

    #[test]
    fn gather_shapes_rows_in_rank_order() {
        let p = 4;
        let out = run(p, |mut ep| {
            let row = vec![ep.rank() as f64; p];
            ep.gather(0, row).unwrap()
        });
        let rows = out[0].as_ref().unwrap();
        assert_eq!(rows.len(), p);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row, &vec![r as f64; p]);
        }
        assert!(out[1..].iter().all(Option::is_none));
    }

    #[test]
    fn reduce_sums_at_root() {
        let out = run(2, |mut ep| {
            let v = if ep.rank() == 0 { 0.5 } else { 1.5 };
            ep.reduce_sum(0, vec![v, 1.0]).unwrap()
        });
        assert_eq!(out[0], Some(vec![2.0, 2.0]));
        assert_eq!(out[1], None);
    }

    #[test]
    fn pivot_search_picks_global_max_lowest_pos() {
        let out = run(3, |mut ep| {
            let local = match ep.rank() {
                0 => Some(Candidate { abs: 2.0, pos: 5 }),
                1 => Some(Candidate { abs: 3.0, pos: 4 }),
                _ => Some(Candidate { abs: 3.0, pos: 1 }),
            };
            (ep.pivot_search(0, local).unwrap(), ep.into_stats())
        });
        for (d, _) in &out {
            assert_eq!(*d, Some(Candidate { abs: 3.0, pos: 1 }));
        }
        let msgs: u64 = out.iter().map(|(_, s)| s.pivot_search_msgs).sum();
        assert_eq!(msgs, 4);
    }

    #[test]
    fn dropped_peer_is_reported() {
        let mut eps = group(2);
        let dead = eps.pop().unwrap();
        drop(dead);
        let mut ep = eps.pop().unwrap();
        assert!(matches!(
            ep.gather(0, vec![1.0]),
            Err(ParallelError::WorkerDropped { rank: 1 })
        ));
        assert!(matches!(
            ep.broadcast(0, Some(Broadcast::Abort)),
            Err(ParallelError::WorkerDropped { rank: 1 })
        ));
    }
}
