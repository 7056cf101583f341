use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A level without its magnetic projection: catalog lines connect levels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Level {
    pub label: String,
    /// Twice the total angular momentum J (nuclear spin excluded).
    pub twice_j: i32,
}

impl Level {
    pub fn new(label: impl Into<String>, twice_j: i32) -> Result<Self> {
        if twice_j <= 0 {
            return Err(Error::domain(format!("2J = {twice_j} must be positive")));
        }
        Ok(Level {
            label: label.into(),
            twice_j,
        })
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (J={}/2)", self.label, self.twice_j)
    }
}

/// Magnetic sublevel of a doublet rovibronic state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoVibronicState {
    pub label: String,
    pub electronic_term: String,
    pub v: u32,
    pub n: u32,
    pub twice_j: i32,
    pub twice_m: i32,
}

impl RoVibronicState {
    /// Doublet state: J must be N ± 1/2.
    pub fn doublet(
        label: impl Into<String>,
        electronic_term: impl Into<String>,
        v: u32,
        n: u32,
        twice_j: i32,
        twice_m: i32,
    ) -> Result<Self> {
        let twice_n = 2 * n as i32;
        if twice_j <= 0 || (twice_j != twice_n + 1 && twice_j != twice_n - 1) {
            return Err(Error::domain(format!("2J = {twice_j} is not 2N ± 1 for N = {n}")));
        }
        if twice_m.abs() > twice_j {
            return Err(Error::domain(format!("|2m| = {} exceeds 2J = {twice_j}", twice_m.abs())));
        }
        if (twice_j + twice_m) % 2 != 0 {
            return Err(Error::domain("2J and 2m must share parity"));
        }
        Ok(RoVibronicState {
            label: label.into(),
            electronic_term: electronic_term.into(),
            v,
            n,
            twice_j,
            twice_m,
        })
    }

    pub fn level(&self) -> Level {
        Level {
            label: self.label.clone(),
            twice_j: self.twice_j,
        }
    }

    pub fn is_level(&self, level: &Level) -> bool {
        self.label == level.label && self.twice_j == level.twice_j
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionLine {
    pub lower: Level,
    pub upper: Level,
    /// Transition frequency in Hz.
    pub frequency: f64,
    /// Vibronic Einstein-A coefficient in s⁻¹.
    pub a_vib: f64,
    /// Normalized Hönl-London factor.
    pub s_rot: f64,
    pub branch: String,
}

impl TransitionLine {
    pub fn new(
        lower: Level,
        upper: Level,
        frequency: f64,
        a_vib: f64,
        s_rot: f64,
        branch: impl Into<String>,
    ) -> Result<Self> {
        if (upper.twice_j - lower.twice_j).abs() > 2 {
            return Err(Error::domain(format!("|ΔJ| > 1 between {lower} and {upper}")));
        }
        if !(frequency > 0.0 && frequency.is_finite()) {
            return Err(Error::domain(format!("line frequency {frequency} must be positive")));
        }
        if !(a_vib >= 0.0 && a_vib.is_finite()) {
            return Err(Error::domain(format!("A_vib {a_vib} must be non-negative")));
        }
        if !(0.0..=1.0).contains(&s_rot) {
            return Err(Error::domain(format!("S_rot {s_rot} outside [0, 1]")));
        }
        Ok(TransitionLine {
            lower,
            upper,
            frequency,
            a_vib,
            s_rot,
            branch: branch.into(),
        })
    }

    pub fn with_a_vib(&self, a_vib: f64) -> Self {
        TransitionLine {
            a_vib,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineCatalog {
    pub name: String,
    pub source_note: String,
    pub lines: Vec<TransitionLine>,
}

pub const CATALOG_HEADER: [&str; 8] = [
    "lower_label",
    "upper_label",
    "frequency_hz",
    "a_vib_per_s",
    "s_rot",
    "twice_j_lower",
    "twice_j_upper",
    "branch",
];

const N2_PLUS_CATALOG: &str = include_str!("../../data/n2plus_a2pi_x2sigma_v2_0.csv");
const CA_PLUS_CATALOG: &str = include_str!("../../data/ca40plus_reference.csv");

impl LineCatalog {
    pub fn new(name: impl Into<String>, source_note: impl Into<String>, lines: Vec<TransitionLine>) -> Result<Self> {
        for (i, a) in lines.iter().enumerate() {
            for b in &lines[i + 1..] {
                if a.lower == b.lower && a.upper == b.upper && a.frequency == b.frequency {
                    return Err(Error::domain(format!(
                        "duplicate line {} -> {} at {} Hz",
                        a.lower, a.upper, a.frequency
                    )));
                }
            }
        }
        Ok(LineCatalog {
            name: name.into(),
            source_note: source_note.into(),
            lines,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// Lines whose lower level is `state`'s level.
    pub fn lines_from<'a>(&'a self, state: &'a RoVibronicState) -> impl Iterator<Item = &'a TransitionLine> + 'a {
        self.lines.iter().filter(move |l| state.is_level(&l.lower))
    }

    pub fn find_branch(&self, branch: &str) -> Option<&TransitionLine> {
        self.lines.iter().find(|l| l.branch == branch)
    }

    /// Distinct lower levels in catalog order.
    pub fn lower_levels(&self) -> Vec<Level> {
        let mut out: Vec<Level> = Vec::new();
        for l in &self.lines {
            if !out.contains(&l.lower) {
                out.push(l.lower.clone());
            }
        }
        out
    }

    /// Parses the catalog CSV schema. `#` lines are provenance comments and are
    /// collected into `source_note`.
    pub fn parse_csv(name: impl Into<String>, text: &str, origin: &str) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: origin.to_string(),
            line,
            message,
        };

        let mut notes = Vec::new();
        let mut header_seen = false;
        let mut lines = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let row = raw.trim();
            if row.is_empty() {
                continue;
            }
            if let Some(note) = row.strip_prefix('#') {
                notes.push(note.trim().to_string());
                continue;
            }
            let fields: Vec<&str> = row.split(',').map(str::trim).collect();
            if !header_seen {
                if fields != CATALOG_HEADER {
                    return Err(parse_err(lineno, format!("expected header `{}`", CATALOG_HEADER.join(","))));
                }
                header_seen = true;
                continue;
            }
            if fields.len() != CATALOG_HEADER.len() {
                return Err(parse_err(
                    lineno,
                    format!("expected {} fields, found {}", CATALOG_HEADER.len(), fields.len()),
                ));
            }
            let num = |i: usize| -> Result<f64> {
                fields[i]
                    .parse::<f64>()
                    .map_err(|_| parse_err(lineno, format!("field `{}` is not a number: {:?}", CATALOG_HEADER[i], fields[i])))
            };
            let int = |i: usize| -> Result<i32> {
                fields[i]
                    .parse::<i32>()
                    .map_err(|_| parse_err(lineno, format!("field `{}` is not an integer: {:?}", CATALOG_HEADER[i], fields[i])))
            };
            let lower = Level::new(fields[0], int(5)?).map_err(|e| parse_err(lineno, e.to_string()))?;
            let upper = Level::new(fields[1], int(6)?).map_err(|e| parse_err(lineno, e.to_string()))?;
            let line = TransitionLine::new(lower, upper, num(2)?, num(3)?, num(4)?, fields[7])
                .map_err(|e| parse_err(lineno, e.to_string()))?;
            lines.push(line);
        }
        if !header_seen {
            return Err(parse_err(0, "missing header".into()));
        }
        LineCatalog::new(name, notes.join("\n"), lines).map_err(|e| parse_err(0, e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::parse_csv(name, &text, &path.display().to_string())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for note in self.source_note.lines() {
            out.push_str("# ");
            out.push_str(note);
            out.push('\n');
        }
        out.push_str(&CATALOG_HEADER.join(","));
        out.push('\n');
        for l in &self.lines {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                l.lower.label, l.upper.label, l.frequency, l.a_vib, l.s_rot, l.lower.twice_j, l.upper.twice_j, l.branch
            ));
        }
        out
    }

    /// N₂⁺ A²Πu(v'=2) ← X²Σg⁺(v''=0) lines around 787.47 nm.
    pub fn n2_plus() -> Self {
        Self::parse_csv("n2plus_a2pi_x2sigma_v2_0", N2_PLUS_CATALOG, "<bundled N2+ catalog>")
            .expect("bundled N2+ catalog is valid")
    }

    /// ⁴⁰Ca⁺ dipole lines used for the atomic reference shifts.
    pub fn ca_plus() -> Self {
        Self::parse_csv("ca40plus_reference", CA_PLUS_CATALOG, "<bundled Ca+ catalog>")
            .expect("bundled Ca+ catalog is valid")
    }
}

/// Label of the N₂⁺ ground rovibronic level in the bundled catalog.
pub const N2_GROUND_LABEL: &str = "X2Sigma_g+(v=0;N=0)";
/// Branch label of the line used for detection and spectroscopy.
pub const R11_HALF: &str = "R11(1/2)";

/// The bright N₂⁺ state |X²Σg⁺, v=0, N=0, J=1/2, m=+1/2⟩.
pub fn n2_bright_state() -> RoVibronicState {
    RoVibronicState::doublet(N2_GROUND_LABEL, "X2Sigma_g+", 0, 0, 1, 1).expect("valid state")
}

/// All m sublevels of the non-bright lower levels in the bundled N₂⁺ catalog.
pub fn n2_other_states(catalog: &LineCatalog) -> Vec<RoVibronicState> {
    let mut out = Vec::new();
    for level in catalog.lower_levels() {
        if level.label == N2_GROUND_LABEL {
            continue;
        }
        let n = parse_rotational_n(&level.label).unwrap_or(((level.twice_j + 1) / 2) as u32);
        for twice_m in (-level.twice_j..=level.twice_j).step_by(2) {
            if let Ok(s) = RoVibronicState::doublet(level.label.clone(), "X2Sigma_g+", 0, n, level.twice_j, twice_m) {
                out.push(s);
            }
        }
    }
    out
}

fn parse_rotational_n(label: &str) -> Option<u32> {
    let start = label.find("N=")? + 2;
    let digits: String = label[start..].chars().take_while(|c| c.is_ascii_digit()).collect();
    digits.parse().ok()
}

/// Ca⁺ |S1/2, m=-1/2⟩, the state coupled to the lattice.
pub fn ca_s_half() -> RoVibronicState {
    RoVibronicState::doublet("4s2S1/2", "2S", 0, 0, 1, -1).expect("valid state")
}

/// Ca⁺ |D5/2, m=-5/2⟩, the shelved state.
pub fn ca_d_five_half() -> RoVibronicState {
    RoVibronicState::doublet("3d2D5/2", "2D", 0, 2, 5, -5).expect("valid state")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    Pi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserField {
    /// Single-beam intensity in W/m².
    pub intensity: f64,
    /// Laser frequency in Hz.
    pub frequency: f64,
    pub polarization: Polarization,
}

impl LaserField {
    pub fn pi(intensity: f64, frequency: f64) -> Result<Self> {
        if !(intensity >= 0.0 && intensity.is_finite()) {
            return Err(Error::domain(format!("intensity {intensity} must be non-negative")));
        }
        if !(frequency > 0.0 && frequency.is_finite()) {
            return Err(Error::domain(format!("laser frequency {frequency} must be positive")));
        }
        Ok(LaserField {
            intensity,
            frequency,
            polarization: Polarization::Pi,
        })
    }
}
