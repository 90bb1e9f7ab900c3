//! `key = value` run configuration with per-key overrides.
//!
//! Every physical quantity is entered in the unit its key names (`_T`, `_nm`,
//! `_GHz`, `_MHz`, `_us`, `_ns`). Unknown keys, duplicate keys, unparsable
//! values and conflicting alternatives are rejected with the offending key
//! and line. Keys that are not given take experiment-dependent defaults; the
//! fully resolved set is what the manifest records and hashes.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::constants::{ghz_to_angular, tesla_to_field, SI};
use crate::error::{Error, Result};
use crate::material::{internal_field, Linewidth, MaterialParams, StaticFieldState};
use crate::modes::CavityConfig;
use crate::network::Detuning;
use crate::Vector3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Modes,
    Spectrum,
    Fieldmap,
    Decay,
    Transfer,
    CouplingSweep,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Modes,
        Experiment::Spectrum,
        Experiment::Fieldmap,
        Experiment::Decay,
        Experiment::Transfer,
        Experiment::CouplingSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Modes => "modes",
            Experiment::Spectrum => "spectrum",
            Experiment::Fieldmap => "fieldmap",
            Experiment::Decay => "decay",
            Experiment::Transfer => "transfer",
            Experiment::CouplingSweep => "coupling-sweep",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
                format!("unknown experiment `{s}` (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Pseudomode,
    Volterra,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisKind {
    Normalized,
    Absolute,
}

/// Recognized keys and a one-line description, in manifest order.
pub const KEYS: &[(&str, &str)] = &[
    ("experiment", "modes | spectrum | fieldmap | decay | transfer | coupling-sweep"),
    ("R_nm", "sphere radius (nm)"),
    ("mu0_H0_T", "internal static field μ0H0 (T); exclusive with mu0_He_T"),
    ("mu0_He_T", "external static field μ0He (T); exclusive with mu0_H0_T"),
    ("mu0_Ms_T", "saturation magnetization μ0Ms (T)"),
    ("gamma_GHz_per_T", "gyromagnetic ratio γ/2π (GHz/T)"),
    ("linewidth_MHz", "magnon linewidth Γ (MHz, see linewidth_convention); exclusive with alpha"),
    ("linewidth_convention", "angular: Γ = value·10⁶ rad/s; cyclic: Γ = 2π·value·10⁶ rad/s"),
    ("alpha", "Gilbert damping; Γ = 2αγμ0H0; exclusive with linewidth_MHz"),
    ("a_over_R", "emitter distance from the centre in radii; exclusive with a_nm"),
    ("a_nm", "emitter distance from the centre (nm); exclusive with a_over_R"),
    ("emitter_direction", "x | y | z | comma-separated vector"),
    ("mu_B_scale", "transition dipole in Bohr magnetons"),
    ("n_max", "highest multipole order"),
    ("delta_over_g", "two-spin detuning Δ/g; exclusive with detuning_MHz"),
    ("detuning_MHz", "two-spin detuning Δ/2π (MHz); exclusive with delta_over_g"),
    ("G_nm", "surface gap for the coupling sweep (nm)"),
    ("t_end_us", "time horizon (μs)"),
    ("samples", "number of output intervals"),
    ("dt_ns", "integration/output step (ns); auto when absent"),
    ("solver", "pseudomode | volterra | both"),
    ("radii_nm", "comma-separated radii for the decay sweep (nm)"),
    ("f_min_GHz", "lower edge of the frequency axis (GHz)"),
    ("f_max_GHz", "upper edge of the frequency axis (GHz)"),
    ("f_points", "number of frequency samples"),
    ("H0_min_T", "lower edge of the field sweep μ0H0 (T)"),
    ("H0_max_T", "upper edge of the field sweep μ0H0 (T)"),
    ("H0_points", "number of field samples"),
    ("fieldmap_axis", "normalized (ω/ω_K) | absolute (GHz)"),
    ("w_min_over_wK", "lower edge of the normalized axis"),
    ("w_max_over_wK", "upper edge of the normalized axis"),
    ("w_points", "number of normalized-axis samples"),
    ("sweep_R_min_nm", "smallest radius of the coupling sweep (nm)"),
    ("sweep_R_max_nm", "largest radius of the coupling sweep (nm)"),
    ("sweep_R_points", "number of radii in the coupling sweep"),
];

/// Mutually exclusive alternatives; the first of each pair is the default.
const EXCLUSIVE: &[(&str, &str)] = &[
    ("mu0_H0_T", "mu0_He_T"),
    ("linewidth_MHz", "alpha"),
    ("a_over_R", "a_nm"),
    ("delta_over_g", "detuning_MHz"),
];

fn default_value(key: &str, exp: Experiment) -> Option<&'static str> {
    use Experiment::*;
    Some(match key {
        "R_nm" => "30",
        "mu0_H0_T" => "0.5",
        "mu0_Ms_T" => "0.178",
        "gamma_GHz_per_T" => "28",
        "linewidth_MHz" => match exp {
            Modes | Spectrum | Fieldmap => "10",
            Decay => "1",
            Transfer | CouplingSweep => "0",
        },
        "linewidth_convention" => "angular",
        "a_over_R" => "1.2",
        "emitter_direction" => "x",
        "mu_B_scale" => "1",
        "n_max" => match exp {
            Spectrum | Decay => "25",
            Modes | Fieldmap | Transfer => "7",
            CouplingSweep => "1",
        },
        "delta_over_g" => "10",
        "G_nm" => "6",
        "t_end_us" => match exp {
            Transfer => "5",
            _ => "1",
        },
        "samples" => match exp {
            Transfer => "20000",
            _ => "100000",
        },
        "solver" => "pseudomode",
        "radii_nm" => "30,50,70,100",
        "f_min_GHz" => "15.4",
        "f_max_GHz" => "16.6",
        "f_points" => "24001",
        "H0_min_T" => "0.1",
        "H0_max_T" => "1",
        "H0_points" => "91",
        "fieldmap_axis" => "normalized",
        "w_min_over_wK" => "0.9",
        "w_max_over_wK" => "1.2",
        "w_points" => "1201",
        "sweep_R_min_nm" => "10",
        "sweep_R_max_nm" => "100",
        "sweep_R_points" => "91",
        _ => return None,
    })
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: Option<usize>,
}

/// Fully resolved run configuration, in SI units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub cavity: CavityConfig,
    /// Emitter distance from the centre (m).
    pub emitter_distance: f64,
    pub emitter_direction: Vector3,
    pub dipole_scale: f64,
    pub detuning: Detuning,
    /// Coupling-sweep gap (m).
    pub gap: f64,
    /// Time horizon (s).
    pub t_end: f64,
    pub samples: usize,
    /// Explicit step (s), if given.
    pub dt: Option<f64>,
    pub solver: Solver,
    /// Decay-sweep radii (m).
    pub radii: Vec<f64>,
    /// Frequency axis (rad/s): min, max, points.
    pub frequency_range: (f64, f64, usize),
    /// Internal-field sweep (A/m): min, max, points.
    pub field_range: (f64, f64, usize),
    pub fieldmap_axis: AxisKind,
    pub normalized_range: (f64, f64, usize),
    /// Coupling-sweep radii (m): min, max, points.
    pub sweep_radius_range: (f64, f64, usize),
    /// Every key with the value in force, given or defaulted.
    pub resolved: BTreeMap<String, String>,
}

impl RunConfig {
    /// Canonical `key = value` text of the resolved configuration. Parsing it
    /// back yields the same configuration.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        for (k, _) in KEYS {
            if let Some(v) = self.resolved.get(*k) {
                out.push_str(&format!("{k} = {v}\n"));
            }
        }
        out
    }
}

/// Parses `text` (`key = value` lines; `#` starts a comment) and applies
/// `overrides` on top. `experiment` may come from either.
pub fn parse_config(text: &str, overrides: &[(String, String)]) -> Result<RunConfig> {
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
            key: None,
            line: Some(line_no),
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        check_known(key, Some(line_no))?;
        if let Some(prev) = entries.get(key) {
            return Err(Error::config(
                key,
                Some(line_no),
                format!("duplicate key (first set on line {})", prev.line.unwrap_or(0)),
            ));
        }
        entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line: Some(line_no),
            },
        );
    }
    for (key, value) in overrides {
        check_known(key, None)?;
        // an override replaces the file value and drops its exclusive partner
        if let Some(partner) = partner_of(key) {
            if entries.get(partner).is_some_and(|e| e.line.is_some()) {
                entries.remove(partner);
            }
        }
        entries.insert(
            key.clone(),
            Entry {
                value: value.trim().to_string(),
                line: None,
            },
        );
    }
    resolve(entries)
}

fn check_known(key: &str, line: Option<usize>) -> Result<()> {
    if KEYS.iter().any(|(k, _)| *k == key) {
        Ok(())
    } else {
        Err(Error::config(key, line, "unknown key"))
    }
}

fn partner_of(key: &str) -> Option<&'static str> {
    EXCLUSIVE.iter().find_map(|&(a, b)| {
        if a == key {
            Some(b)
        } else if b == key {
            Some(a)
        } else {
            None
        }
    })
}

struct Resolver {
    entries: BTreeMap<String, Entry>,
    experiment: Experiment,
    resolved: BTreeMap<String, String>,
}

impl Resolver {
    fn raw(&mut self, key: &str) -> Result<Option<(String, Option<usize>)>> {
        let got = match self.entries.get(key) {
            Some(e) => Some((e.value.clone(), e.line)),
            None => default_value(key, self.experiment).map(|v| (v.to_string(), None)),
        };
        if let Some((v, _)) = &got {
            self.resolved.insert(key.to_string(), v.clone());
        }
        Ok(got)
    }

    fn required(&mut self, key: &str) -> Result<(String, Option<usize>)> {
        self.raw(key)?
            .ok_or_else(|| Error::config(key, None, "missing required key"))
    }

    fn parse<T: FromStr>(&mut self, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        let (v, line) = self.required(key)?;
        v.parse::<T>()
            .map_err(|e| Error::config(key, line, format!("cannot parse `{v}`: {e}")))
    }

    fn number(&mut self, key: &str) -> Result<f64> {
        let x: f64 = self.parse(key)?;
        if !x.is_finite() {
            return Err(Error::config(key, self.line(key), "value must be finite"));
        }
        Ok(x)
    }

    fn positive(&mut self, key: &str) -> Result<f64> {
        let x = self.number(key)?;
        if x <= 0.0 {
            return Err(Error::Domain(format!("{key} = {x}: value must be positive")));
        }
        Ok(x)
    }

    fn count(&mut self, key: &str, min: usize) -> Result<usize> {
        let n: usize = self.parse(key)?;
        if n < min {
            return Err(Error::Domain(format!("{key} = {n}: must be at least {min}")));
        }
        Ok(n)
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).and_then(|e| e.line)
    }

    /// Which of an exclusive pair is in force; errors if both were given.
    fn choose(&self, a: &'static str, b: &'static str) -> Result<&'static str> {
        match (self.entries.contains_key(a), self.entries.contains_key(b)) {
            (true, true) => Err(Error::config(
                b,
                self.line(b),
                format!("conflicts with `{a}`; give only one of them"),
            )),
            (false, true) => Ok(b),
            _ => Ok(a),
        }
    }

    fn range(&mut self, lo: &str, hi: &str, n: &str, scale: f64) -> Result<(f64, f64, usize)> {
        let a = self.positive(lo)?;
        let b = self.positive(hi)?;
        let points = self.count(n, 1)?;
        if b < a || (b == a && points > 1) {
            return Err(Error::Domain(format!("{hi} = {b} must exceed {lo} = {a}")));
        }
        Ok((a * scale, b * scale, points))
    }
}

fn parse_direction(s: &str) -> std::result::Result<Vector3, String> {
    match s {
        "x" | "+x" => return Ok(Vector3::x()),
        "-x" => return Ok(-Vector3::x()),
        "y" | "+y" => return Ok(Vector3::y()),
        "-y" => return Ok(-Vector3::y()),
        "z" | "+z" => return Ok(Vector3::z()),
        "-z" => return Ok(-Vector3::z()),
        _ => {}
    }
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<std::result::Result<_, _>>()?;
    if parts.len() != 3 {
        return Err(format!("expected x, y, z or three comma-separated numbers, got `{s}`"));
    }
    let v = Vector3::new(parts[0], parts[1], parts[2]);
    if !(v.norm() > 0.0 && v.norm().is_finite()) {
        return Err("direction must be a finite non-zero vector".into());
    }
    Ok(v / v.norm())
}

fn resolve(entries: BTreeMap<String, Entry>) -> Result<RunConfig> {
    let experiment = match entries.get("experiment") {
        Some(e) => e
            .value
            .parse::<Experiment>()
            .map_err(|msg| Error::config("experiment", e.line, msg))?,
        None => return Err(Error::config("experiment", None, "missing required key")),
    };
    let mut r = Resolver {
        entries,
        experiment,
        resolved: BTreeMap::new(),
    };
    r.resolved.insert("experiment".into(), experiment.name().into());

    let radius = r.positive("R_nm")? * 1e-9;
    let ms = tesla_to_field(r.positive("mu0_Ms_T")?)?;
    let gamma = r.positive("gamma_GHz_per_T")?;
    let gyro = SI.with_gamma_ghz_per_tesla(gamma).gyromagnetic_ratio;

    let linewidth = match r.choose("linewidth_MHz", "alpha")? {
        "alpha" => Linewidth::Gilbert {
            alpha: r.number("alpha")?,
        },
        _ => {
            let value = r.number("linewidth_MHz")?;
            let (conv, line) = r.required("linewidth_convention")?;
            let factor = match conv.as_str() {
                "angular" => 1e6,
                "cyclic" => 2.0 * PI * 1e6,
                other => {
                    return Err(Error::config(
                        "linewidth_convention",
                        line,
                        format!("expected `angular` or `cyclic`, got `{other}`"),
                    ))
                }
            };
            Linewidth::Fixed { gamma: value * factor }
        }
    };
    let material = MaterialParams::new(ms, gyro, linewidth).map_err(|e| keyed(e, "linewidth_MHz"))?;

    let fields = match r.choose("mu0_H0_T", "mu0_He_T")? {
        "mu0_He_T" => {
            let he = tesla_to_field(r.number("mu0_He_T")?)?;
            internal_field(he, &material).map_err(|e| keyed(e, "mu0_He_T"))?
        }
        _ => {
            let h0 = tesla_to_field(r.positive("mu0_H0_T")?)?;
            StaticFieldState::from_internal(h0, &material)?
        }
    };
    let n_max: u32 = r.parse("n_max")?;
    if n_max < 1 {
        return Err(Error::Domain("n_max = 0: must be at least 1".into()));
    }
    let cavity = CavityConfig::new(radius, material, fields, n_max)?;

    let emitter_distance = match r.choose("a_over_R", "a_nm")? {
        "a_nm" => r.positive("a_nm")? * 1e-9,
        _ => r.positive("a_over_R")? * radius,
    };
    if emitter_distance < radius {
        return Err(Error::Domain(format!(
            "emitter distance {:.3} nm lies inside the sphere (R = {:.3} nm)",
            emitter_distance * 1e9,
            radius * 1e9
        )));
    }
    let (dir, line) = r.required("emitter_direction")?;
    let emitter_direction =
        parse_direction(&dir).map_err(|msg| Error::config("emitter_direction", line, msg))?;
    let dipole_scale = r.positive("mu_B_scale")?;

    let detuning = match r.choose("delta_over_g", "detuning_MHz")? {
        "detuning_MHz" => Detuning::Absolute(ghz_to_angular(r.number("detuning_MHz")? * 1e-3)),
        _ => Detuning::OverCoupling(r.number("delta_over_g")?),
    };
    let gap = r.number("G_nm")? * 1e-9;
    if gap < 0.0 {
        return Err(Error::Domain(format!("G_nm = {}: gap must be non-negative", gap * 1e9)));
    }

    let t_end = r.positive("t_end_us")? * 1e-6;
    let samples = r.count("samples", 1)?;
    let dt = if r.entries.contains_key("dt_ns") {
        Some(r.positive("dt_ns")? * 1e-9)
    } else {
        None
    };
    let (solver_name, line) = r.required("solver")?;
    let solver = match solver_name.as_str() {
        "pseudomode" => Solver::Pseudomode,
        "volterra" => Solver::Volterra,
        "both" => Solver::Both,
        other => {
            return Err(Error::config(
                "solver",
                line,
                format!("expected pseudomode, volterra or both, got `{other}`"),
            ))
        }
    };
    let (radii_text, line) = r.required("radii_nm")?;
    let radii = radii_text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::config("radii_nm", line, format!("cannot parse `{}`: {e}", s.trim())))
        })
        .collect::<Result<Vec<f64>>>()?;
    if let Some(bad) = radii.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Domain(format!("radii_nm: radius {bad} must be positive")));
    }
    let radii = radii.into_iter().map(|x| x * 1e-9).collect();

    let frequency_range = r.range("f_min_GHz", "f_max_GHz", "f_points", 2.0 * PI * 1e9)?;
    let field_range = r.range("H0_min_T", "H0_max_T", "H0_points", 1.0 / SI.mu0)?;
    let (axis, line) = r.required("fieldmap_axis")?;
    let fieldmap_axis = match axis.as_str() {
        "normalized" => AxisKind::Normalized,
        "absolute" => AxisKind::Absolute,
        other => {
            return Err(Error::config(
                "fieldmap_axis",
                line,
                format!("expected normalized or absolute, got `{other}`"),
            ))
        }
    };
    let normalized_range = r.range("w_min_over_wK", "w_max_over_wK", "w_points", 1.0)?;
    let sweep_radius_range = r.range("sweep_R_min_nm", "sweep_R_max_nm", "sweep_R_points", 1e-9)?;
    if let Some(v) = r.entries.get("dt_ns") {
        r.resolved.insert("dt_ns".into(), v.value.clone());
    }

    Ok(RunConfig {
        experiment,
        cavity,
        emitter_distance,
        emitter_direction,
        dipole_scale,
        detuning,
        gap,
        t_end,
        samples,
        dt,
        solver,
        radii,
        frequency_range,
        field_range,
        fieldmap_axis,
        normalized_range,
        sweep_radius_range,
        resolved: r.resolved,
    })
}

/// Attaches `key` to value-range errors raised while building physics objects.
fn keyed(err: Error, key: &str) -> Error {
    match err {
        Error::Domain(msg) => Error::Domain(format!("{key}: {msg}")),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn units_are_converted() {
        let c = parse_config("experiment = modes\nR_nm=30\nmu0_H0_T=0.5", &[]).unwrap();
        assert!((c.cavity.radius - 3e-8).abs() < 1e-20);
        assert!((c.cavity.fields.internal - 0.5 / SI.mu0).abs() < 1e-6);
        assert_eq!(c.experiment, Experiment::Modes);
    }

    #[test]
    fn override_wins() {
        let c = parse_config("experiment=modes\nR_nm=30", &ov(&[("R_nm", "50")])).unwrap();
        assert!((c.cavity.radius - 5e-8).abs() < 1e-20);
        assert_eq!(c.resolved["R_nm"], "50");
    }

    #[test]
    fn negative_radius_is_domain_error_naming_key() {
        let err = parse_config("experiment=modes\nR_nm=-5", &[]).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
        assert!(err.to_string().contains("R_nm"));
    }

    #[test]
    fn unknown_key_names_key_and_line() {
        match parse_config("experiment=modes\n\nradius=3", &[]).unwrap_err() {
            Error::Config { key, line, .. } => {
                assert_eq!(key.as_deref(), Some("radius"));
                assert_eq!(line, Some(3));
            }
            e => panic!("{e:?}"),
        }
        assert!(matches!(
            parse_config("experiment=modes", &ov(&[("bogus", "1")])),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn unparsable_value_names_key() {
        match parse_config("experiment=modes\nn_max=seven", &[]).unwrap_err() {
            Error::Config { key, line, .. } => {
                assert_eq!(key.as_deref(), Some("n_max"));
                assert_eq!(line, Some(2));
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn missing_experiment() {
        assert!(matches!(parse_config("R_nm=30", &[]), Err(Error::Config { .. })));
    }

    #[test]
    fn exclusive_pair_conflict() {
        assert!(matches!(
            parse_config("experiment=modes\nmu0_H0_T=0.5\nmu0_He_T=0.56", &[]),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn override_replaces_exclusive_partner_from_file() {
        let c = parse_config("experiment=modes\nmu0_H0_T=0.5", &ov(&[("mu0_He_T", "0.5593")])).unwrap();
        assert!((c.cavity.fields.internal * SI.mu0 - 0.5).abs() < 1e-3);
        assert!(!c.resolved.contains_key("mu0_H0_T"));
    }

    #[test]
    fn external_field_back_computation() {
        let c = parse_config("experiment=modes\nmu0_He_T=0.5593333333333333", &[]).unwrap();
        assert!((c.cavity.fields.internal * SI.mu0 - 0.5).abs() < 1e-12);
        let err = parse_config("experiment=modes\nmu0_He_T=0.05", &[]).unwrap_err();
        assert!(err.to_string().contains("not saturated"));
    }

    #[test]
    fn linewidth_conventions() {
        let a = parse_config("experiment=modes\nlinewidth_MHz=10", &[]).unwrap();
        assert_eq!(a.cavity.linewidth(), 1e7);
        let b = parse_config("experiment=modes\nlinewidth_MHz=1\nlinewidth_convention=cyclic", &[]).unwrap();
        assert!((b.cavity.linewidth() - 2.0 * PI * 1e6).abs() < 1e-6);
        let c = parse_config("experiment=modes\nalpha=1e-4", &[]).unwrap();
        let expected = 2e-4 * c.cavity.material.gamma_tilde() * c.cavity.fields.internal;
        assert!((c.cavity.linewidth() - expected).abs() < 1e-6);
    }

    #[test]
    fn experiment_dependent_defaults() {
        let d = parse_config("experiment=decay", &[]).unwrap();
        assert_eq!(d.cavity.linewidth(), 1e6);
        assert_eq!(d.radii.len(), 4);
        let t = parse_config("experiment=transfer", &[]).unwrap();
        assert_eq!(t.cavity.linewidth(), 0.0);
        assert_eq!(t.detuning, Detuning::OverCoupling(10.0));
    }

    #[test]
    fn canonical_text_round_trips() {
        let c = parse_config("experiment=spectrum\nR_nm=50 # caption value\nmu0_He_T=0.6", &[]).unwrap();
        let again = parse_config(&c.canonical_text(), &[]).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn directions() {
        let c = parse_config("experiment=modes\nemitter_direction=0,0,2", &[]).unwrap();
        assert_eq!(c.emitter_direction, Vector3::z());
        assert!(parse_config("experiment=modes\nemitter_direction=0,0", &[]).is_err());
    }
}
