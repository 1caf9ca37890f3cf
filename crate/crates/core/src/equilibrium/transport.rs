//! Capacitated transportation problem solved by successive shortest paths.
//!
//! Sources carry a fixed supply that must be shipped in full; sinks accept
//! flow up to an optional capacity. Every source is connected to every sink.
//! Each augmentation follows a shortest path in the residual graph, so the
//! flow stays cost-optimal for the volume shipped so far.
//!
//! Ties between equally short paths are resolved by the lowest sink index,
//! then by the lowest source index.

use crate::error::Error;

/// Relative slack used when comparing path lengths.
const DIST_REL_TOL: f64 = 1e-12;

pub(crate) struct TransportProblem<'a> {
    pub supply: &'a [f64],
    /// `None` marks an unbounded sink.
    pub capacity: &'a [Option<f64>],
    /// Source-major: `cost[s * n_sinks + t]`.
    pub cost: &'a [f64],
}

#[derive(Debug, Clone)]
pub(crate) struct TransportFlow {
    /// Source-major, same layout as the costs.
    pub flow: Vec<f64>,
    pub augmentations: usize,
}

#[derive(Clone, Copy, PartialEq)]
enum Pred {
    None,
    Source,
    /// Reached by undoing flow on `(source, sink)`.
    Sink(usize),
}

fn improves(candidate: f64, current: f64) -> bool {
    if current.is_infinite() {
        return candidate.is_finite();
    }
    candidate < current - DIST_REL_TOL * current.abs().max(1.0)
}

pub(crate) fn solve_transport(p: &TransportProblem<'_>) -> Result<TransportFlow, Error> {
    let ns = p.supply.len();
    let nt = p.capacity.len();
    debug_assert_eq!(p.cost.len(), ns * nt);

    let total: f64 = p.supply.iter().sum();
    let eps = 1e-12 * total.max(1.0);
    if ns == 0 || total <= eps {
        return Ok(TransportFlow {
            flow: vec![0.0; ns * nt],
            augmentations: 0,
        });
    }
    if p.capacity.iter().all(Option::is_some) {
        let cap: f64 = p.capacity.iter().flatten().sum();
        if cap < total - eps {
            return Err(Error::Infeasible(format!(
                "supply {total} exceeds total capacity {cap}"
            )));
        }
    }

    let mut residual: Vec<f64> = p.supply.to_vec();
    let mut load = vec![0.0; nt];
    let mut flow = vec![0.0; ns * nt];
    let limit = 10_000 + 50 * (ns + nt) * (ns + nt);
    let mut augmentations = 0;

    let mut dist_s = vec![f64::INFINITY; ns];
    let mut pred_s = vec![Pred::None; ns];
    let mut dist_t = vec![f64::INFINITY; nt];
    let mut pred_t = vec![usize::MAX; nt];

    while residual.iter().any(|&r| r > eps) {
        augmentations += 1;
        if augmentations > limit {
            return Err(Error::Solver(format!(
                "transportation solver exceeded {limit} augmentations"
            )));
        }

        dist_s.fill(f64::INFINITY);
        pred_s.fill(Pred::None);
        dist_t.fill(f64::INFINITY);
        pred_t.fill(usize::MAX);
        for s in 0..ns {
            if residual[s] > eps {
                dist_s[s] = 0.0;
                pred_s[s] = Pred::Source;
            }
        }

        // Bellman-Ford on the bipartite residual graph: forward arcs
        // source -> sink carry cost c, reverse arcs sink -> source carry -c
        // wherever flow can be undone.
        for _ in 0..=(ns + nt) {
            let mut changed = false;
            for s in 0..ns {
                if dist_s[s].is_infinite() {
                    continue;
                }
                for t in 0..nt {
                    let cand = dist_s[s] + p.cost[s * nt + t];
                    if improves(cand, dist_t[t]) {
                        dist_t[t] = cand;
                        pred_t[t] = s;
                        changed = true;
                    }
                }
            }
            for t in 0..nt {
                if dist_t[t].is_infinite() {
                    continue;
                }
                for s in 0..ns {
                    if flow[s * nt + t] > eps {
                        let cand = dist_t[t] - p.cost[s * nt + t];
                        if improves(cand, dist_s[s]) {
                            dist_s[s] = cand;
                            pred_s[s] = Pred::Sink(t);
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }

        let open = |t: usize| match p.capacity[t] {
            None => true,
            Some(c) => c - load[t] > eps,
        };
        let mut target = None;
        for t in (0..nt).filter(|&t| open(t) && dist_t[t].is_finite()) {
            match target {
                None => target = Some(t),
                Some(b) if improves(dist_t[t], dist_t[b]) => target = Some(t),
                _ => {}
            }
        }
        let Some(target) = target else {
            return Err(Error::Infeasible(
                "no augmenting path while supply remains".into(),
            ));
        };

        // Walk predecessors back to a source with residual supply. Each hop
        // is a forward arc (s, t) followed, unless s starts the path, by a
        // reverse arc (s, t') whose flow shrinks.
        let mut forward = Vec::new();
        let mut backward = Vec::new();
        let mut t = target;
        let start = loop {
            let s = pred_t[t];
            forward.push((s, t));
            match pred_s[s] {
                Pred::Source => break s,
                Pred::Sink(prev) => {
                    backward.push((s, prev));
                    t = prev;
                }
                Pred::None => unreachable!("sink reached from an unlabeled source"),
            }
            if forward.len() > ns + nt {
                return Err(Error::Solver("cycle in shortest-path tree".into()));
            }
        };

        let mut amount = residual[start];
        if let Some(c) = p.capacity[target] {
            amount = amount.min(c - load[target]);
        }
        for &(s, t) in &backward {
            amount = amount.min(flow[s * nt + t]);
        }

        for &(s, t) in &forward {
            flow[s * nt + t] += amount;
        }
        for &(s, t) in &backward {
            let f = &mut flow[s * nt + t];
            *f -= amount;
            if *f <= eps {
                *f = 0.0;
            }
        }
        load[target] += amount;
        residual[start] -= amount;
        if residual[start] <= eps {
            residual[start] = 0.0;
        }
    }

    Ok(TransportFlow {
        flow,
        augmentations,
    })
}
