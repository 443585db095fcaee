use std::time::Duration;

use rand::Rng;

use crate::sampler::SearchRng;

/// A scored program kept in the database.
#[derive(Debug, Clone, PartialEq)]
pub struct ProgramRecord {
    pub source: String,
    /// Canonical text used for deduplication.
    pub normalized: String,
    /// Total cost including penalties; always finite.
    pub score: f64,
    pub evaluation_time: Duration,
    pub sampling_time: Duration,
    /// Sample index that produced this record.
    pub generation: usize,
    pub island: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Registration {
    Added,
    Duplicate,
    /// Island full and the record is no better than its worst member.
    Rejected,
    NonFinite,
}

/// Independent populations of scored programs, each kept sorted best first.
#[derive(Debug, Clone)]
pub struct ProgramDatabase {
    islands: Vec<Vec<ProgramRecord>>,
    capacity: usize,
}

impl ProgramDatabase {
    pub fn new(islands: usize, capacity: usize) -> Self {
        assert!(
            islands > 0 && capacity > 0,
            "database needs islands and capacity"
        );
        ProgramDatabase {
            islands: vec![Vec::new(); islands],
            capacity,
        }
    }

    pub fn num_islands(&self) -> usize {
        self.islands.len()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn island(&self, island: usize) -> &[ProgramRecord] {
        &self.islands[island]
    }

    pub fn len(&self) -> usize {
        self.islands.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn register(&mut self, record: ProgramRecord) -> Registration {
        if !record.score.is_finite() {
            return Registration::NonFinite;
        }
        let capacity = self.capacity;
        let pop = &mut self.islands[record.island];
        if pop.iter().any(|r| r.normalized == record.normalized) {
            return Registration::Duplicate;
        }
        if pop.len() >= capacity {
            if pop.last().is_some_and(|worst| record.score >= worst.score) {
                return Registration::Rejected;
            }
            pop.pop();
        }
        // Equal scores keep arrival order.
        let at = pop.partition_point(|r| r.score <= record.score);
        pop.insert(at, record);
        Registration::Added
    }

    /// Up to `k` best records of an island, ordered worst to best.
    pub fn top_k(&self, island: usize, k: usize) -> Vec<&ProgramRecord> {
        let pop = &self.islands[island];
        pop[..k.min(pop.len())].iter().rev().collect()
    }

    pub fn best_overall(&self) -> Option<&ProgramRecord> {
        self.islands
            .iter()
            .filter_map(|pop| pop.first())
            .min_by(|a, b| {
                a.score
                    .total_cmp(&b.score)
                    .then(a.generation.cmp(&b.generation))
            })
    }

    fn island_best(&self, island: usize) -> f64 {
        self.islands[island]
            .first()
            .map_or(f64::INFINITY, |r| r.score)
    }

    /// Empties the island with the worst best score and reseeds it with the
    /// best program of a randomly chosen other island. Returns the reset island.
    pub fn reset_worst(&mut self, rng: &mut SearchRng) -> Option<usize> {
        let n = self.islands.len();
        if n < 2 {
            return None;
        }
        let worst = (0..n).max_by(|&a, &b| {
            self.island_best(a)
                .total_cmp(&self.island_best(b))
                .then(b.cmp(&a))
        })?;
        let mut donor = rng.random_range(0..n - 1);
        if donor >= worst {
            donor += 1;
        }
        let seed = self.islands[donor].first().cloned();
        self.islands[worst].clear();
        if let Some(mut rec) = seed {
            rec.island = worst;
            self.islands[worst].push(rec);
        }
        Some(worst)
    }
}
