//! Line-oriented `key = value` model files.
//!
//! Files are split into `[section]` blocks. Floats are written in their
//! shortest round-tripping form so re-reading a file reproduces the model bit
//! for bit and identical models always produce identical text.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::features::{FeatureCatalog, NormalizationParams};
use crate::learning::{TrainingScope, WeightVector};
use crate::roles::{Point, RoleModel};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone)]
struct Line {
    key: String,
    value: String,
    line: usize,
}

/// Parsed model file: sections of ordered key/value lines.
#[derive(Debug, Clone)]
pub struct ModelDoc {
    path: PathBuf,
    sections: BTreeMap<String, Vec<Line>>,
}

impl ModelDoc {
    pub fn parse(text: &str, path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let mut sections: BTreeMap<String, Vec<Line>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim().to_string();
                if sections.contains_key(&name) {
                    return Err(Error::ModelFile { path, line: i + 1, message: format!("section [{name}] repeated") });
                }
                sections.insert(name.clone(), Vec::new());
                current = Some(name);
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::ModelFile { path, line: i + 1, message: "expected `key = value`".into() });
            };
            let Some(section) = &current else {
                return Err(Error::ModelFile { path, line: i + 1, message: "entry outside a section".into() });
            };
            sections.get_mut(section).expect("section exists").push(Line {
                key: k.trim().to_string(),
                value: v.trim().to_string(),
                line: i + 1,
            });
        }
        Ok(ModelDoc { path, sections })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn has_section(&self, name: &str) -> bool {
        self.sections.contains_key(name)
    }

    fn section(&self, name: &str) -> Result<Section<'_>> {
        let lines = self.sections.get(name).ok_or_else(|| Error::ModelFile {
            path: self.path.clone(),
            line: 0,
            message: format!("missing section [{name}]"),
        })?;
        Ok(Section { path: &self.path, name: name.to_string(), lines })
    }
}

struct Section<'a> {
    path: &'a Path,
    name: String,
    lines: &'a [Line],
}

impl Section<'_> {
    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::ModelFile { path: self.path.to_path_buf(), line, message: message.into() }
    }

    fn get_line(&self, key: &str) -> Result<&Line> {
        self.lines
            .iter()
            .find(|l| l.key == key)
            .ok_or_else(|| self.err(0, format!("[{}] is missing `{key}`", self.name)))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        let l = self.get_line(key)?;
        l.value.parse().map_err(|_| self.err(l.line, format!("cannot parse `{key}` from `{}`", l.value)))
    }

    fn prefixed<'s>(&'s self, prefix: &'s str) -> impl Iterator<Item = (&'s str, &'s Line)> + 's {
        self.lines.iter().filter_map(move |l| l.key.strip_prefix(prefix).map(|rest| (rest, l)))
    }

    fn floats(&self, l: &Line, n: usize) -> Result<Vec<f64>> {
        let vals: Vec<f64> = l
            .value
            .split_whitespace()
            .map(f64::from_str)
            .collect::<Result<_, _>>()
            .map_err(|_| self.err(l.line, format!("bad number in `{}`", l.value)))?;
        if vals.len() != n || vals.iter().any(|v| !v.is_finite()) {
            return Err(self.err(l.line, format!("expected {n} finite numbers")));
        }
        Ok(vals)
    }

    fn check_features(&self, catalog: &FeatureCatalog, found: &[&str], line: usize) -> Result<()> {
        let names = catalog.names();
        if found.len() != names.len() || found.iter().zip(&names).any(|(a, b)| *a != b.as_str()) {
            return Err(Error::CatalogMismatch {
                expected: format!("{} features in catalog order", names.len()),
                found: format!("{} features in [{}] (line {line})", found.len(), self.name),
            });
        }
        Ok(())
    }

    fn check_hash(&self, catalog: &FeatureCatalog) -> Result<String> {
        let hash: String = self.get("catalog_hash")?;
        if hash != catalog.hash() {
            return Err(Error::CatalogMismatch { expected: catalog.hash().to_string(), found: hash });
        }
        Ok(hash)
    }
}

fn header(out: &mut String, section: &str) {
    let _ = writeln!(out, "[{section}]");
}

pub fn write_normalization(out: &mut String, section: &str, p: &NormalizationParams, catalog: &FeatureCatalog) {
    header(out, section);
    let _ = writeln!(out, "catalog_hash = {}", p.catalog_hash);
    let _ = writeln!(out, "max_goals = {}", p.max_goals);
    for (i, name) in catalog.names().iter().enumerate() {
        let _ = writeln!(out, "feature.{name} = {:?} {:?}", p.min[i], p.max[i]);
    }
    out.push('\n');
}

pub fn read_normalization(doc: &ModelDoc, section: &str, catalog: &FeatureCatalog) -> Result<NormalizationParams> {
    let s = doc.section(section)?;
    let catalog_hash = s.check_hash(catalog)?;
    let (mut names, mut min, mut max) = (Vec::new(), Vec::new(), Vec::new());
    let mut last = 0;
    for (name, l) in s.prefixed("feature.") {
        let v = s.floats(l, 2)?;
        if v[0] > v[1] {
            return Err(s.err(l.line, "min exceeds max"));
        }
        names.push(name);
        min.push(v[0]);
        max.push(v[1]);
        last = l.line;
    }
    s.check_features(catalog, &names, last)?;
    Ok(NormalizationParams { catalog_hash, min, max, max_goals: s.get("max_goals")? })
}

pub fn write_weights(out: &mut String, section: &str, w: &WeightVector, catalog: &FeatureCatalog) {
    header(out, section);
    let _ = writeln!(out, "catalog_hash = {}", w.catalog_hash);
    let _ = writeln!(out, "scope = {}", w.scope);
    let _ = writeln!(out, "cost = {:?}", w.cost);
    let _ = writeln!(out, "intercept = {:?}", w.intercept);
    for (name, v) in catalog.names().iter().zip(&w.weights) {
        let _ = writeln!(out, "weight.{name} = {v:?}");
    }
    out.push('\n');
}

pub fn read_weights(doc: &ModelDoc, section: &str, catalog: &FeatureCatalog) -> Result<WeightVector> {
    let s = doc.section(section)?;
    let catalog_hash = s.check_hash(catalog)?;
    let (mut names, mut weights) = (Vec::new(), Vec::new());
    let mut last = 0;
    for (name, l) in s.prefixed("weight.") {
        names.push(name);
        weights.push(s.floats(l, 1)?[0]);
        last = l.line;
    }
    s.check_features(catalog, &names, last)?;
    let scope_line = s.get_line("scope")?;
    let scope: TrainingScope =
        scope_line.value.parse().map_err(|_| s.err(scope_line.line, "bad scope"))?;
    Ok(WeightVector { weights, intercept: s.get("intercept")?, catalog_hash, scope, cost: s.get("cost")? })
}

pub fn write_role_model(out: &mut String, section: &str, m: &RoleModel, delta_s: f64) {
    header(out, section);
    let _ = writeln!(out, "k = {}", m.k);
    let _ = writeln!(out, "silhouette = {:?}", m.silhouette);
    let _ = writeln!(out, "delta_s = {delta_s:?}");
    let _ = writeln!(out, "seed = {}", m.seed);
    let _ = writeln!(out, "sample_digest = {}", m.sample_digest());
    for (k, ss) in &m.sweep {
        let _ = writeln!(out, "sweep.{k} = {ss:?}");
    }
    for (i, c) in m.centroids.iter().enumerate() {
        let _ = writeln!(out, "centroid.{i} = {:?} {:?}", c[0], c[1]);
    }
    for (i, pts) in m.samples.iter().enumerate() {
        let mut line = String::new();
        for p in pts {
            let _ = write!(line, "{:?} {:?} ", p[0], p[1]);
        }
        let _ = writeln!(out, "sample.{i} = {}", line.trim_end());
    }
    out.push('\n');
}

/// Returns the model and its stored δ_s.
pub fn read_role_model(doc: &ModelDoc, section: &str) -> Result<(RoleModel, f64)> {
    let s = doc.section(section)?;
    let k: usize = s.get("k")?;
    let indexed = |prefix: &'static str| -> Result<Vec<&Line>> {
        let mut out = Vec::new();
        for (i, (idx, l)) in s.prefixed(prefix).enumerate() {
            if idx.parse::<usize>().ok() != Some(i) {
                return Err(s.err(l.line, format!("expected {prefix}{i}")));
            }
            out.push(l);
        }
        if out.len() != k {
            return Err(s.err(0, format!("expected {k} `{prefix}` lines, found {}", out.len())));
        }
        Ok(out)
    };
    let centroids = indexed("centroid.")?
        .into_iter()
        .map(|l| s.floats(l, 2).map(|v| [v[0], v[1]]))
        .collect::<Result<Vec<Point>>>()?;
    let mut samples = Vec::with_capacity(k);
    for l in indexed("sample.")? {
        let n = l.value.split_whitespace().count();
        if n == 0 || n % 2 != 0 {
            return Err(s.err(l.line, "sample needs a non-empty list of x y pairs"));
        }
        let v = s.floats(l, n)?;
        samples.push(v.chunks(2).map(|c| [c[0], c[1]]).collect());
    }
    let mut sweep = BTreeMap::new();
    for (key, l) in s.prefixed("sweep.") {
        let k = key.parse().map_err(|_| s.err(l.line, "bad sweep key"))?;
        sweep.insert(k, s.floats(l, 1)?[0]);
    }
    let model = RoleModel { k, centroids, silhouette: s.get("silhouette")?, seed: s.get("seed")?, sweep, samples };
    let digest: String = s.get("sample_digest")?;
    if digest != model.sample_digest() {
        return Err(s.err(s.get_line("sample_digest")?.line, "fitting sample does not match its digest"));
    }
    let delta: f64 = s.get("delta_s")?;
    if !(0.0..=1.0).contains(&delta) {
        return Err(s.err(s.get_line("delta_s")?.line, "delta_s outside [0, 1]"));
    }
    Ok((model, delta))
}

/// Standalone single-artifact files.
pub fn normalization_to_string(p: &NormalizationParams, catalog: &FeatureCatalog) -> String {
    let mut out = format!("# playerank normalization v{FORMAT_VERSION}\n");
    write_normalization(&mut out, "normalization", p, catalog);
    out
}

pub fn weights_to_string(w: &WeightVector, catalog: &FeatureCatalog) -> String {
    let mut out = format!("# playerank weights v{FORMAT_VERSION}\n");
    write_weights(&mut out, "weights", w, catalog);
    out
}

pub fn role_model_to_string(m: &RoleModel, delta_s: f64) -> String {
    let mut out = format!("# playerank roles v{FORMAT_VERSION}\n");
    write_role_model(&mut out, "roles", m, delta_s);
    out
}
