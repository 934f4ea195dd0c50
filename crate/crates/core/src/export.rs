//! File formats for point sets, envelopes, trial records and estimate
//! reports.
//!
//! Every file starts with a metadata block. In CSV it is a run of `# `
//! comment lines (tool, command, one `config.<key> = <value>` line per
//! setting, seed, rng); in JSON it is a top-level `"metadata"` object. The
//! block holds no timestamps, so identical inputs produce identical bytes.
//!
//! | file          | columns / shape                                       |
//! |---------------|-------------------------------------------------------|
//! | points CSV    | `w_num,w_den,re_z,im_z`                               |
//! | envelope CSV  | `w_num,w_den,f_num,f_den`                             |
//! | trials CSV    | `word,site_1,…,site_n,herald`                         |
//! | JSON          | exact rationals as `{"num": .., "den": ..}`           |

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lhv::{EnvelopePolyline, MomentPointSet, RNG_ALGORITHM};
use crate::model::{BellFunctional, MomentPoint, Rational, SiteCount};
use crate::quantum::SettingWord;
use crate::sim::{EstimateReport, TrialRecord, TrialSet, ViolationReport};

pub const TOOL_NAME: &str = "lossbell";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub rng: String,
}

impl Metadata {
    pub fn new(command: &str, config: BTreeMap<String, String>, seed: Option<u64>) -> Self {
        Metadata {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            config,
            seed,
            rng: RNG_ALGORITHM.to_string(),
        }
    }

    pub fn write_comment_block<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "# tool: {} {}", self.tool, self.version)?;
        writeln!(out, "# command: {}", self.command)?;
        for (k, v) in &self.config {
            writeln!(out, "# config.{k} = {v}")?;
        }
        match self.seed {
            Some(s) => writeln!(out, "# seed: {s}")?,
            None => writeln!(out, "# seed: none")?,
        }
        writeln!(out, "# rng: {}", self.rng)?;
        Ok(())
    }
}

/// Exact rational as `{num, den}`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactJson {
    pub num: i128,
    pub den: i128,
}

impl From<Rational> for ExactJson {
    fn from(r: Rational) -> Self {
        ExactJson {
            num: *r.numer(),
            den: *r.denom(),
        }
    }
}

impl From<ExactJson> for Rational {
    fn from(e: ExactJson) -> Self {
        Rational::new(e.num, e.den)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointJson {
    pub w: ExactJson,
    pub re_z: i64,
    pub im_z: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSetJson {
    pub metadata: Metadata,
    pub n: u32,
    pub points: Vec<PointJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexJson {
    pub w: ExactJson,
    pub f: ExactJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeJson {
    pub metadata: Metadata,
    pub n: u32,
    pub functional: BellFunctional,
    pub vertices: Vec<VertexJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub metadata: Metadata,
    pub estimate: EstimateReport,
    pub violation: Option<ViolationReport>,
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_points_csv<W: Write>(set: &MomentPointSet, meta: &Metadata, mut out: W) -> Result<()> {
    meta.write_comment_block(&mut out)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["w_num", "w_den", "re_z", "im_z"])?;
    for p in set.iter() {
        w.write_record([
            p.w.numer().to_string(),
            p.w.denom().to_string(),
            p.re_z.to_string(),
            p.im_z.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a points CSV back, skipping the metadata block.
pub fn read_points_csv<R: BufRead>(n: SiteCount, input: R) -> Result<MomentPointSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let field = |i: usize| -> Result<i128> {
            rec.get(i)
                .ok_or_else(|| Error::Io(format!("missing column {i}")))?
                .trim()
                .parse::<i128>()
                .map_err(|e| Error::Io(e.to_string()))
        };
        let (num, den) = (field(0)?, field(1)?);
        if den <= 0 {
            return Err(Error::Io(format!("nonpositive denominator {den}")));
        }
        points.push(MomentPoint {
            sites: n,
            w: Rational::new(num, den),
            re_z: field(2)? as i64,
            im_z: field(3)? as i64,
        });
    }
    MomentPointSet::from_points(n, points)
}

pub fn points_json(set: &MomentPointSet, meta: &Metadata) -> PointSetJson {
    PointSetJson {
        metadata: meta.clone(),
        n: set.sites().get(),
        points: set
            .iter()
            .map(|p| PointJson {
                w: p.w.into(),
                re_z: p.re_z,
                im_z: p.im_z,
            })
            .collect(),
    }
}

pub fn write_envelope_csv<W: Write>(
    env: &EnvelopePolyline,
    meta: &Metadata,
    mut out: W,
) -> Result<()> {
    meta.write_comment_block(&mut out)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["w_num", "w_den", "f_num", "f_den"])?;
    for v in env.vertices() {
        w.write_record([
            v.w.numer().to_string(),
            v.w.denom().to_string(),
            v.f.numer().to_string(),
            v.f.denom().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn envelope_json(env: &EnvelopePolyline, meta: &Metadata) -> EnvelopeJson {
    EnvelopeJson {
        metadata: meta.clone(),
        n: env.sites().get(),
        functional: env.functional(),
        vertices: env
            .vertices()
            .iter()
            .map(|v| VertexJson {
                w: v.w.into(),
                f: v.f.into(),
            })
            .collect(),
    }
}

pub fn write_trials_csv<W: Write>(trials: &TrialSet, meta: &Metadata, mut out: W) -> Result<()> {
    meta.write_comment_block(&mut out)?;
    let n = trials.sites().as_usize();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["word".to_string()];
    header.extend((1..=n).map(|k| format!("site_{k}")));
    header.push("herald".to_string());
    w.write_record(&header)?;
    for r in trials.iter() {
        let mut row = Vec::with_capacity(n + 2);
        row.push(r.word.to_string());
        row.extend(r.outcomes.iter().map(|o| o.to_string()));
        row.push(u8::from(r.herald).to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trials CSV. The site count comes from the header and the seed
/// from the `# seed:` metadata line (0 when absent).
pub fn read_trials_csv<R: BufRead>(input: R) -> Result<TrialSet> {
    let mut text = String::new();
    let mut seed = 0;
    for line in input.lines() {
        let line = line?;
        if let Some(rest) = line.strip_prefix("# seed:") {
            seed = rest.trim().parse().unwrap_or(0);
        }
        text.push_str(&line);
        text.push('\n');
    }
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    if header.len() < 4
        || header.get(0) != Some("word")
        || header.get(header.len() - 1) != Some("herald")
    {
        return Err(Error::Io(
            "trials CSV needs columns word, site_1..site_n, herald".into(),
        ));
    }
    let n = SiteCount::new(header.len() as u32 - 2)?;
    let mut grouped: BTreeMap<SettingWord, Vec<TrialRecord>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let bad = |what: &str| {
            Error::Io(format!(
                "line {}: bad {what}",
                rec.position().map_or(0, |p| p.line())
            ))
        };
        let word: SettingWord = rec[0].parse().map_err(|_| bad("word"))?;
        if word.sites() != n.get() {
            return Err(bad("word length"));
        }
        let outcomes = (1..=n.as_usize())
            .map(|k| match rec[k].trim() {
                "1" => Ok(1),
                "0" => Ok(0),
                "-1" => Ok(-1),
                _ => Err(bad("outcome")),
            })
            .collect::<Result<Vec<i8>>>()?;
        let herald = match rec[n.as_usize() + 1].trim() {
            "1" => true,
            "0" => false,
            _ => return Err(bad("herald")),
        };
        grouped.entry(word).or_default().push(TrialRecord {
            word,
            outcomes,
            herald,
        });
    }
    let mut set = TrialSet::new(n, seed);
    for (w, r) in grouped {
        set.insert(w, r);
    }
    Ok(set)
}

pub fn write_json<W: Write, T: Serialize>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lhv::{enumerate_moment_points, envelope_for, EnumerationMode};

    fn meta() -> Metadata {
        Metadata::new("test", BTreeMap::from([("n".into(), "3".into())]), Some(7))
    }

    #[test]
    fn points_csv_layout() {
        let n = SiteCount::new(2).unwrap();
        let set = enumerate_moment_points(n, EnumerationMode::Dp).unwrap();
        let mut buf = Vec::new();
        write_points_csv(&set, &meta(), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# tool: lossbell "));
        assert!(text.contains("# config.n = 3\n# seed: 7\n"));
        assert!(text.contains("\nw_num,w_den,re_z,im_z\n0,1,0,0\n"));
        let back = read_points_csv(n, buf.as_slice()).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn envelope_json_is_exact() {
        let env = envelope_for(SiteCount::new(3).unwrap(), &BellFunctional::mermin()).unwrap();
        let j = envelope_json(&env, &meta());
        let text = serde_json::to_string(&j).unwrap();
        assert!(text.contains(r#"{"w":{"num":1,"den":8},"f":{"num":1,"den":1}}"#));
        let back: EnvelopeJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back, j);
    }

    #[test]
    fn trials_round_trip() {
        use crate::model::EfficiencyProfile;
        use crate::quantum::optimal_settings;
        use crate::sim::simulate_design;
        let n = SiteCount::new(3).unwrap();
        let s = optimal_settings(n, &BellFunctional::mermin())
            .unwrap()
            .settings;
        let etas = EfficiencyProfile::symmetric(n, 0.7).unwrap();
        let trials = simulate_design(n, &etas, &s, 50, 7).unwrap();
        let mut buf = Vec::new();
        write_trials_csv(&trials, &meta(), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("\nword,site_1,site_2,site_3,herald\nAAA,"));
        assert_eq!(read_trials_csv(buf.as_slice()).unwrap(), trials);
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
    }
}
