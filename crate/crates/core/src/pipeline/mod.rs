//! Orchestration of every stage into a persisted, resumable proof ledger.
//!
//! Each stage writes `<out_dir>/<stage>.json` with the schema
//! `{stage, anchor, inputs, outputs, precision_bits, wall_ms}`; `outputs`
//! always carries a boolean `holds`. With `resume`, a stage whose stored
//! inputs equal the current ones is loaded instead of recomputed.

mod large_k;
mod logs;
mod small_k;
mod theorem;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::realnum::PrecisionPolicy;

pub use large_k::{
    attainable_lambda_at_most, e4_round, e6_round, run_large_k, DegenerateCase, E4Round, E6Round, LegendreCase,
    RealUpper, LAMBDA_A, LAMBDA_B, M_A, M_B,
};
pub use logs::LogTable;
pub use small_k::{round1_for_k, round2_for_k, run_small_k, KSources, Round1K, Round2K};
pub use theorem::{
    expected_solutions, run_verify_theorem, verify_theorem, EntryCheck, FamilyCheck, TheoremReport, THEOREM_FAMILIES,
    THEOREM_TABLE,
};

/// What to run and where to put it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Small-k range, a subset of `[4, 500]`.
    pub k_min: u32,
    pub k_max: u32,
    /// Largest `n` in the final sweep and in theorem verification.
    pub n_max: u64,
    /// Largest `k` in theorem verification.
    pub theorem_k_max: u32,
    pub policy: PrecisionPolicy,
    /// Worker threads; `0` uses the default pool.
    pub jobs: usize,
    pub out_dir: Option<PathBuf>,
    pub resume: bool,
    /// Run the second small-k reduction round (off means round 1 only).
    pub round2: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            k_min: 4,
            k_max: 50,
            n_max: 500,
            theorem_k_max: 50,
            policy: PrecisionPolicy::default(),
            jobs: 0,
            out_dir: None,
            resume: false,
            round2: true,
        }
    }
}

impl RunConfig {
    /// The complete computation: `k` in `[4, 500]` and verification up to 500.
    pub fn full() -> Self {
        RunConfig { k_max: 500, theorem_k_max: 500, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_min > self.k_max {
            return Err(Error::InvalidArgument(format!("empty k range {}..={}", self.k_min, self.k_max)));
        }
        if self.n_max == 0 {
            return Err(Error::InvalidArgument("n cap must be positive".into()));
        }
        if self.theorem_k_max < 2 {
            return Err(Error::InvalidArgument("theorem verification needs k_max >= 2".into()));
        }
        Ok(())
    }

    fn validate_small_k(&self) -> Result<()> {
        self.validate()?;
        if self.k_min < 4 || self.k_max > 500 {
            return Err(Error::InvalidArgument(format!(
                "small-k range {}..={} must lie in [4, 500]",
                self.k_min, self.k_max
            )));
        }
        Ok(())
    }
}

/// One persisted stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub anchor: String,
    pub inputs: Value,
    pub outputs: Value,
    pub precision_bits: u32,
    pub wall_ms: u64,
}

impl StageRecord {
    pub fn holds(&self) -> bool {
        self.outputs.get("holds").and_then(Value::as_bool).unwrap_or(false)
    }

    /// `outputs` without the `holds` flag, decoded.
    pub fn decode<O: DeserializeOwned>(&self) -> Result<O> {
        Ok(serde_json::from_value(self.outputs.clone())?)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProofLedger {
    pub stages: Vec<StageRecord>,
}

impl ProofLedger {
    pub fn holds(&self) -> bool {
        self.stages.iter().all(StageRecord::holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &StageRecord> {
        self.stages.iter().filter(|s| !s.holds())
    }

    pub fn get(&self, stage: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.stage == stage)
    }

    pub fn extend(&mut self, other: ProofLedger) {
        self.stages.extend(other.stages);
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

#[derive(Serialize, Deserialize)]
struct Outputs<O> {
    holds: bool,
    #[serde(flatten)]
    value: O,
}

/// A computed stage: its outputs, whether every checked bound holds, and the
/// largest working precision used.
pub struct Computed<O> {
    pub value: O,
    pub holds: bool,
    pub precision_bits: u32,
}

/// Runs stages in order, persisting and resuming them.
pub struct StageRunner {
    dir: Option<PathBuf>,
    resume: bool,
    ledger: ProofLedger,
}

impl StageRunner {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        if let Some(dir) = &cfg.out_dir {
            fs::create_dir_all(dir)?;
        }
        Ok(StageRunner { dir: cfg.out_dir.clone(), resume: cfg.resume, ledger: ProofLedger::default() })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn path(&self, stage: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{stage}.json")))
    }

    fn load(&self, stage: &str, inputs: &Value) -> Option<StageRecord> {
        if !self.resume {
            return None;
        }
        let path = self.path(stage)?;
        let text = fs::read_to_string(&path).ok()?;
        match serde_json::from_str::<StageRecord>(&text) {
            Ok(rec) if rec.inputs == *inputs && rec.stage == stage => Some(rec),
            Ok(_) => {
                log::info!("{}: inputs changed, recomputing", path.display());
                None
            }
            Err(e) => {
                log::warn!("{}: unreadable ({e}), recomputing", path.display());
                None
            }
        }
    }

    /// Runs (or resumes) one stage. A stage whose bounds do not hold is still
    /// persisted, then reported as [`Error::Mismatch`].
    pub fn run<I, O, F>(&mut self, stage: &str, anchor: &str, inputs: &I, compute: F) -> Result<O>
    where
        I: Serialize,
        O: Serialize + DeserializeOwned,
        F: FnOnce() -> Result<Computed<O>>,
    {
        let inputs = serde_json::to_value(inputs)?;
        let (record, value) = match self.load(stage, &inputs) {
            Some(rec) => {
                log::info!("stage {stage}: resumed");
                let out: Outputs<O> = serde_json::from_value(rec.outputs.clone())?;
                (rec, out.value)
            }
            None => {
                log::info!("stage {stage}: running");
                let start = Instant::now();
                let c = compute()?;
                let outputs = serde_json::to_value(Outputs { holds: c.holds, value: &c.value })?;
                let rec = StageRecord {
                    stage: stage.to_string(),
                    anchor: anchor.to_string(),
                    inputs,
                    outputs,
                    precision_bits: c.precision_bits,
                    wall_ms: start.elapsed().as_millis() as u64,
                };
                if let Some(path) = self.path(stage) {
                    fs::write(path, serde_json::to_string_pretty(&rec)?)?;
                }
                (rec, c.value)
            }
        };
        let holds = record.holds();
        self.ledger.stages.push(record);
        if !holds {
            self.write_rollup()?;
            return Err(Error::Mismatch(format!("stage {stage}: a computed bound exceeds its target")));
        }
        Ok(value)
    }

    fn write_rollup(&self) -> Result<()> {
        if let Some(dir) = &self.dir {
            self.ledger.write_json(dir.join("ledger.json"))?;
        }
        Ok(())
    }

    pub fn finish(self) -> Result<ProofLedger> {
        self.write_rollup()?;
        Ok(self.ledger)
    }
}

/// Process exit code for a pipeline result: `0` when every bound holds, `2`
/// for a mathematical mismatch, `1` for anything operational.
pub fn exit_code<T>(result: &Result<T>) -> i32 {
    match result {
        Ok(_) => 0,
        Err(Error::Mismatch(_)) => 2,
        Err(_) => 1,
    }
}

/// Runs theorem verification, both small-k rounds and the large-k chain.
pub fn full_proof(cfg: &RunConfig) -> Result<ProofLedger> {
    let mut ledger = run_verify_theorem(cfg)?;
    ledger.extend(run_small_k(cfg)?);
    ledger.extend(run_large_k(cfg)?);
    if let Some(dir) = &cfg.out_dir {
        ledger.write_json(dir.join("ledger.json"))?;
    }
    Ok(ledger)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Out {
        x: u32,
    }

    #[test]
    fn config_validation() {
        assert!(RunConfig::default().validate_small_k().is_ok());
        assert!(RunConfig { k_min: 3, ..RunConfig::default() }.validate_small_k().is_err());
        assert!(RunConfig { k_max: 501, ..RunConfig::default() }.validate_small_k().is_err());
        assert!(RunConfig { k_min: 9, k_max: 8, ..RunConfig::default() }.validate().is_err());
        assert!(RunConfig { n_max: 0, ..RunConfig::default() }.validate().is_err());
    }

    #[test]
    fn runner_persists_and_resumes() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig { out_dir: Some(dir.path().into()), resume: true, ..RunConfig::default() };
        let mut r = StageRunner::new(&cfg).unwrap();
        let v: Out = r
            .run("demo", "x < 10", &7u32, || Ok(Computed { value: Out { x: 7 }, holds: true, precision_bits: 64 }))
            .unwrap();
        assert_eq!(v, Out { x: 7 });
        let first = r.finish().unwrap();
        assert!(dir.path().join("demo.json").exists());

        let mut r = StageRunner::new(&cfg).unwrap();
        let v: Out = r.run("demo", "x < 10", &7u32, || panic!("must resume")).unwrap();
        assert_eq!(v, Out { x: 7 });
        assert_eq!(r.finish().unwrap().stages, first.stages);

        // changed inputs force a recomputation
        let mut r = StageRunner::new(&cfg).unwrap();
        let v: Out = r
            .run("demo", "x < 10", &8u32, || Ok(Computed { value: Out { x: 8 }, holds: true, precision_bits: 64 }))
            .unwrap();
        assert_eq!(v.x, 8);
    }

    #[test]
    fn failing_stage_is_a_mismatch() {
        let mut r = StageRunner::new(&RunConfig::default()).unwrap();
        let res: Result<Out> =
            r.run("bad", "x < 1", &(), || Ok(Computed { value: Out { x: 3 }, holds: false, precision_bits: 0 }));
        assert_eq!(exit_code(&res), 2);
        assert_eq!(exit_code::<()>(&Err(Error::InvalidArgument("x".into()))), 1);
        assert_eq!(exit_code(&Ok(())), 0);
    }
}
