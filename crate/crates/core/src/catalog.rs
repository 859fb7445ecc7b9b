//! End-to-end pipeline for generalized Franel problems and the append-only
//! JSON-lines catalog that stores its results.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::apery::{limit_report, Convergence, LimitReport};
use crate::error::{Error, Result};
use crate::exact::rational::serde_rational_vec;
use crate::hyperterm::ProperTerm;
use crate::identify::{find_relation, ConstantMatch, RelationOutcome, DEFAULT_BASIS, MIN_DIGITS};
use crate::miracle::{base_recurrence, build_problem_with, TheoremOneSpec};
use crate::telescope::Recurrence;
use crate::Rational;

/// Parameters behind an entry: a checked spec or anything else.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntrySpec {
    TheoremOne(TheoremOneSpec),
    Free(serde_json::Value),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub digits: u32,
    #[serde(rename = "N")]
    pub n: usize,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl Provenance {
    pub fn now(digits: u32, n: usize) -> Self {
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Provenance { tool_version: env!("CARGO_PKG_VERSION").to_string(), digits, n, timestamp }
    }
}

/// Where a failed run stopped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub stage: String,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub hash: String,
    pub term: ProperTerm,
    pub spec: EntrySpec,
    pub recurrence: Option<Recurrence>,
    #[serde(rename = "initA", with = "serde_rational_vec")]
    pub init_a: Vec<Rational>,
    #[serde(rename = "initB", with = "serde_rational_vec")]
    pub init_b: Vec<Rational>,
    pub limit_digits: Option<String>,
    pub alpha_estimate: Option<String>,
    pub delta_estimate: Option<String>,
    pub convergence: Option<Convergence>,
    pub digits_stable: Option<u32>,
    pub identification: Option<ConstantMatch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
    pub provenance: Provenance,
}

/// Hex SHA-256 of the compact JSON of `(term, spec, recurrence)`.
pub fn content_hash(term: &ProperTerm, spec: &EntrySpec, rec: Option<&Recurrence>) -> String {
    let key = serde_json::to_string(&(term, spec, rec)).expect("catalog key serializes");
    Sha256::digest(key.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

impl CatalogEntry {
    fn new(term: ProperTerm, spec: EntrySpec, provenance: Provenance) -> Self {
        CatalogEntry {
            hash: String::new(),
            term,
            spec,
            recurrence: None,
            init_a: Vec::new(),
            init_b: Vec::new(),
            limit_digits: None,
            alpha_estimate: None,
            delta_estimate: None,
            convergence: None,
            digits_stable: None,
            identification: None,
            failure: None,
            provenance,
        }
    }

    fn seal(mut self) -> Self {
        self.hash = content_hash(&self.term, &self.spec, self.recurrence.as_ref());
        self
    }

    fn fail(mut self, stage: &str, e: &Error) -> Self {
        self.failure = Some(Failure { stage: stage.into(), error: e.to_string() });
        self.seal()
    }

    pub fn is_ok(&self) -> bool {
        self.failure.is_none()
    }

    /// The spec of a generalized Franel entry.
    pub fn theorem_spec(&self) -> Option<&TheoremOneSpec> {
        match &self.spec {
            EntrySpec::TheoremOne(t) => Some(t),
            EntrySpec::Free(_) => None,
        }
    }

    /// Recompute the limit from the stored recurrence and initial values.
    pub fn replay(&self) -> Result<LimitReport> {
        let rec = self.recurrence.clone().ok_or_else(|| Error::InvalidArgument("entry has no recurrence".into()))?;
        let p = crate::apery::AperyProblem::new(rec, self.init_a.clone(), self.init_b.clone(), None)?;
        limit_report(&p, self.provenance.n, self.provenance.digits)
    }
}

/// Precision used for identification: half the working precision, capped
/// by the digits that actually stabilized.
pub fn identify_digits(digits: u32, digits_stable: u32) -> u32 {
    (digits / 2).min(digits_stable)
}

/// Recurrence, miracle check, limit and identification for `spec`. The
/// returned entry is always complete; on failure it names the stage and
/// the error is returned alongside.
pub fn run_pipeline(spec: &TheoremOneSpec, n: usize, digits: u32) -> (CatalogEntry, Option<Error>) {
    let term = spec.term();
    let entry = CatalogEntry::new(term.clone(), EntrySpec::TheoremOne(spec.clone()), Provenance::now(digits, n));
    let rec = match base_recurrence(&term) {
        Ok(r) => r,
        Err(e) => return (entry.fail("recurrence", &e), Some(e)),
    };
    let mut entry = CatalogEntry { recurrence: Some(rec.clone()), ..entry };
    let problem = match build_problem_with(spec, &rec) {
        Ok(p) => p,
        Err(e) => return (entry.fail("miracle", &e), Some(e)),
    };
    entry.init_a = problem.init_a.clone();
    entry.init_b = problem.init_b.clone();
    let report = match limit_report(&problem, n, digits) {
        Ok(r) => r,
        Err(e) => return (entry.fail("limit", &e), Some(e)),
    };
    entry.limit_digits = Some(report.limit.to_decimal(digits));
    entry.alpha_estimate = report.alpha_estimate.as_ref().map(|a| a.to_decimal(6));
    entry.delta_estimate = report.delta_estimate.as_ref().map(|d| d.to_decimal(6));
    entry.convergence = Some(report.convergence);
    entry.digits_stable = Some(report.digits_stable);
    if report.convergence == Convergence::NonConvergent {
        let e = Error::NonConvergent(report.diagnostic.clone().unwrap_or_else(|| "ratios do not settle".into()));
        return (entry.fail("limit", &e), Some(e));
    }
    let id_digits = identify_digits(digits, report.digits_stable);
    if id_digits >= MIN_DIGITS {
        match find_relation(&report.limit, &DEFAULT_BASIS, id_digits) {
            Ok(RelationOutcome::Match(m)) => entry.identification = Some(m),
            Ok(_) => {}
            Err(e) => return (entry.fail("identify", &e), Some(e)),
        }
    }
    (entry.seal(), None)
}

/// Which entries a query keeps; unset fields match everything.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CatalogFilter {
    pub s: Option<u32>,
    pub a: Option<Rational>,
    /// A basis name appearing with a nonzero coefficient in the identification.
    pub constant: Option<String>,
    pub hash: Option<String>,
}

impl CatalogFilter {
    pub fn matches(&self, e: &CatalogEntry) -> bool {
        let spec = e.theorem_spec();
        if let Some(s) = self.s {
            if spec.map(|t| t.s) != Some(s) {
                return false;
            }
        }
        if let Some(a) = &self.a {
            if spec.map(|t| &t.a) != Some(a) {
                return false;
            }
        }
        if let Some(h) = &self.hash {
            if !e.hash.starts_with(h.as_str()) {
                return false;
            }
        }
        if let Some(c) = &self.constant {
            let c = c.to_ascii_lowercase();
            let hit = e.identification.as_ref().is_some_and(|m| {
                m.basis.iter().zip(&m.coeffs[1..]).any(|(name, k)| *name == c && !num_traits::Zero::is_zero(k))
            });
            if !hit {
                return false;
            }
        }
        true
    }
}

/// An append-only JSON-lines file of [`CatalogEntry`] values.
#[derive(Debug)]
pub struct Catalog {
    path: PathBuf,
    writer: Mutex<()>,
}

impl Catalog {
    pub fn open(path: impl AsRef<Path>) -> Self {
        Catalog { path: path.as_ref().to_path_buf(), writer: Mutex::new(()) }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// All entries; a missing file is an empty catalog.
    pub fn entries(&self) -> Result<Vec<CatalogEntry>> {
        let file = match File::open(&self.path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        let mut out = Vec::new();
        let mut offset = 0usize;
        let mut reader = BufReader::new(file);
        let mut line = String::new();
        loop {
            line.clear();
            let read = reader.read_line(&mut line)?;
            if read == 0 {
                break;
            }
            if !line.trim().is_empty() {
                let entry = serde_json::from_str(&line).map_err(|e| {
                    Error::Parse(format!("{}: byte offset {}: {e}", self.path.display(), offset + e.column().saturating_sub(1)))
                })?;
                out.push(entry);
            }
            offset += read;
        }
        Ok(out)
    }

    pub fn query(&self, filter: &CatalogFilter) -> Result<Vec<CatalogEntry>> {
        Ok(self.entries()?.into_iter().filter(|e| filter.matches(e)).collect())
    }

    /// Append unless an entry with the same hash exists; returns whether
    /// anything was written.
    pub fn append(&self, entry: &CatalogEntry) -> Result<bool> {
        let _guard = self.writer.lock().unwrap_or_else(|p| p.into_inner());
        if self.entries()?.iter().any(|e| e.hash == entry.hash) {
            return Ok(false);
        }
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        let mut line = serde_json::to_string(entry)?;
        line.push('\n');
        f.write_all(line.as_bytes())?;
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::int;

    fn temp_path(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("aperylim-catalog-{}-{name}", std::process::id()));
        let _ = std::fs::remove_file(&dir);
        dir
    }

    #[test]
    fn franel_three_pipeline() {
        let spec = TheoremOneSpec::new(3, 2, int(1)).unwrap();
        let (entry, err) = run_pipeline(&spec, 100, 80);
        assert!(err.is_none(), "{err:?}");
        assert_eq!(entry.identification.as_ref().unwrap().expression(), "3*zeta2");
        assert!(entry.limit_digits.as_ref().unwrap().starts_with("4.934802200544679309417245499938075567"));
        let replay = entry.replay().unwrap();
        assert_eq!(replay.limit.to_decimal(80), *entry.limit_digits.as_ref().unwrap());

        let path = temp_path("franel");
        let cat = Catalog::open(&path);
        assert!(cat.query(&CatalogFilter::default()).unwrap().is_empty());
        assert!(cat.append(&entry).unwrap());
        assert!(!cat.append(&entry).unwrap());
        let hits = cat.query(&CatalogFilter { constant: Some("zeta2".into()), ..Default::default() }).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].hash, entry.hash);
        assert_eq!(hits[0].limit_digits, entry.limit_digits);
        assert_eq!(hits[0].recurrence, entry.recurrence);
        let by_hash = cat.query(&CatalogFilter { hash: Some(entry.hash.clone()), ..Default::default() }).unwrap();
        assert_eq!(by_hash.len(), 1);
        assert!(cat.query(&CatalogFilter { s: Some(4), ..Default::default() }).unwrap().is_empty());
        std::fs::remove_file(path).unwrap();
    }

    #[test]
    fn antisymmetric_case_has_zero_limit() {
        let spec = TheoremOneSpec::new(3, 1, int(1)).unwrap();
        let (entry, err) = run_pipeline(&spec, 40, 40);
        assert!(err.is_none(), "{err:?}");
        assert_eq!(entry.limit_digits.as_deref(), Some("0"));
    }

    #[test]
    fn corrupt_line_reports_offset() {
        let path = temp_path("corrupt");
        std::fs::write(&path, "\n{\"hash\": 3\n").unwrap();
        let err = Catalog::open(&path).entries().unwrap_err();
        match err {
            Error::Parse(msg) => assert!(msg.contains("byte offset"), "{msg}"),
            other => panic!("{other:?}"),
        }
        std::fs::remove_file(path).unwrap();
    }

    #[test]
    fn hash_depends_on_spec() {
        let a = TheoremOneSpec::new(3, 2, int(1)).unwrap();
        let b = TheoremOneSpec::new(3, 1, int(1)).unwrap();
        let t = a.term();
        assert_ne!(
            content_hash(&t, &EntrySpec::TheoremOne(a), None),
            content_hash(&t, &EntrySpec::TheoremOne(b), None)
        );
    }
}
