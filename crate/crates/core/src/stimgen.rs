//! Frame-based stimulus arithmetic.
//!
//! A stimulus advances one image every `N` display frames. With a monitor
//! refresh rate `SRR`, the image (frame) rate is `F = SRR / N` and, for a
//! gait sequence of `images_per_cycle` images, the stride frequency is
//! `f = SRR / (images_per_cycle * N)`.
//!
//! Every frequency here is a rational `SRR * num / den` with small integer
//! `num` and `den`, evaluated with a single floating-point division so that
//! coincidences such as `F1 - 2 f1 = 8 f4 = 7.5 Hz` hold exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Images in one gait cycle of the walking sequence.
pub const GAIT_IMAGES_PER_CYCLE: u32 = 16;

/// Default highest stride harmonic searched by [`detect_confounds`].
pub const DEFAULT_MAX_HARMONIC: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StimulusKind {
    Flicker,
    Checkerboard,
    Gait,
}

impl StimulusKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StimulusKind::Flicker => "flicker",
            StimulusKind::Checkerboard => "checkerboard",
            StimulusKind::Gait => "gait",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Position {
    Left,
    Right,
    Up,
    Down,
}

/// One stimulus target. Serializes as a [`StimulusRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "StimulusRecord", try_from = "StimulusRecord")]
pub struct StimulusSpec {
    pub kind: StimulusKind,
    /// Display frames each image is held for (`N`).
    pub n_frames_per_image: u32,
    pub refresh_rate_hz: f64,
    /// 16 for gait, 1 for flicker and checkerboard.
    pub images_per_cycle: u32,
    pub position: Position,
}

impl StimulusSpec {
    pub fn gait(n: u32, position: Position) -> Self {
        StimulusSpec {
            kind: StimulusKind::Gait,
            n_frames_per_image: n,
            refresh_rate_hz: 60.0,
            images_per_cycle: GAIT_IMAGES_PER_CYCLE,
            position,
        }
    }

    pub fn flicker(n: u32, position: Position) -> Self {
        StimulusSpec {
            kind: StimulusKind::Flicker,
            n_frames_per_image: n,
            refresh_rate_hz: 60.0,
            images_per_cycle: 1,
            position,
        }
    }

    /// Same frame timing, different stimulus kind. Non-gait kinds use a
    /// single-image cycle.
    pub fn with_kind(self, kind: StimulusKind) -> Self {
        let images_per_cycle = match kind {
            StimulusKind::Gait => GAIT_IMAGES_PER_CYCLE,
            _ => 1,
        };
        StimulusSpec {
            kind,
            images_per_cycle,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_frames_per_image == 0 {
            return Err(Error::param("n_frames_per_image", "must be at least 1"));
        }
        if !(self.refresh_rate_hz.is_finite() && self.refresh_rate_hz > 0.0) {
            return Err(Error::param(
                "refresh_rate_hz",
                format!("must be finite and positive, got {}", self.refresh_rate_hz),
            ));
        }
        if self.images_per_cycle == 0 {
            return Err(Error::param("images_per_cycle", "must be at least 1"));
        }
        Ok(())
    }

    /// `SRR * num / den` with `den` scaled by `N`.
    fn rational(&self, num: f64, den_per_n: f64) -> f64 {
        self.refresh_rate_hz * num / (den_per_n * self.n_frames_per_image as f64)
    }

    /// Stride harmonic `m * f`.
    pub fn stride_harmonic(&self, m: u32) -> f64 {
        self.rational(m as f64, self.images_per_cycle as f64)
    }
}

/// The four gait targets of the recorded protocol: N = 7, 5, 6, 4 at the
/// left, right, up and down positions on a 60 Hz display.
pub fn reference_gait_set() -> Vec<StimulusSpec> {
    vec![
        StimulusSpec::gait(7, Position::Left),
        StimulusSpec::gait(5, Position::Right),
        StimulusSpec::gait(6, Position::Up),
        StimulusSpec::gait(4, Position::Down),
    ]
}

/// Frame rate `F = SRR / N`.
pub fn frame_rate(spec: &StimulusSpec) -> Result<f64> {
    spec.validate()?;
    Ok(spec.rational(1.0, 1.0))
}

/// Stride frequency `f = SRR / (images_per_cycle * N)`; equals `F` for
/// single-image stimuli.
pub fn stride_frequency(spec: &StimulusSpec) -> Result<f64> {
    spec.validate()?;
    Ok(spec.stride_harmonic(1))
}

/// Image index shown on every display frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSchedule {
    pub frame_indices: Vec<u32>,
    pub duration_s: f64,
    pub refresh_rate_hz: f64,
    pub n_frames_per_image: u32,
    pub images_per_cycle: u32,
}

impl FrameSchedule {
    /// Number of image changes between consecutive frames.
    pub fn advances(&self) -> usize {
        self.frame_indices
            .windows(2)
            .filter(|w| w[0] != w[1])
            .count()
    }

    /// Image display periods covered, counting a truncated final block fractionally.
    pub fn image_periods(&self) -> f64 {
        self.frame_indices.len() as f64 / self.n_frames_per_image as f64
    }

    pub fn cycles(&self) -> f64 {
        self.image_periods() / self.images_per_cycle as f64
    }
}

pub fn build_schedule(spec: &StimulusSpec, duration_s: f64) -> Result<FrameSchedule> {
    spec.validate()?;
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(Error::param(
            "duration_s",
            format!("must be positive, got {duration_s}"),
        ));
    }
    let n_frames = (duration_s * spec.refresh_rate_hz).round() as usize;
    let hold = spec.n_frames_per_image as usize;
    let cycle = spec.images_per_cycle as usize;
    let frame_indices = (0..n_frames).map(|i| ((i / hold) % cycle) as u32).collect();
    Ok(FrameSchedule {
        frame_indices,
        duration_s,
        refresh_rate_hz: spec.refresh_rate_hz,
        n_frames_per_image: spec.n_frames_per_image,
        images_per_cycle: spec.images_per_cycle,
    })
}

/// Symbolic template component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    #[serde(rename = "F")]
    FrameRate,
    #[serde(rename = "F-2f")]
    LowerSideband,
    #[serde(rename = "F+2f")]
    UpperSideband,
    #[serde(rename = "2F")]
    SecondHarmonic,
}

impl Component {
    pub fn frequency(self, spec: &StimulusSpec) -> f64 {
        let ipc = spec.images_per_cycle as f64;
        match self {
            Component::FrameRate => spec.rational(1.0, 1.0),
            Component::LowerSideband => spec.rational(ipc - 2.0, ipc),
            Component::UpperSideband => spec.rational(ipc + 2.0, ipc),
            Component::SecondHarmonic => spec.rational(2.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CombinationId {
    Cb1,
    Cb2,
    Cb3,
    Cb4,
    Harmonic2,
}

impl CombinationId {
    pub const GAIT: [CombinationId; 4] = [
        CombinationId::Cb1,
        CombinationId::Cb2,
        CombinationId::Cb3,
        CombinationId::Cb4,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CombinationId::Cb1 => "cb1",
            CombinationId::Cb2 => "cb2",
            CombinationId::Cb3 => "cb3",
            CombinationId::Cb4 => "cb4",
            CombinationId::Harmonic2 => "harmonic2",
        }
    }
}

impl std::str::FromStr for CombinationId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cb1" => Ok(CombinationId::Cb1),
            "cb2" => Ok(CombinationId::Cb2),
            "cb3" => Ok(CombinationId::Cb3),
            "cb4" => Ok(CombinationId::Cb4),
            "harmonic2" => Ok(CombinationId::Harmonic2),
            other => Err(Error::param("combination", format!("unknown `{other}`"))),
        }
    }
}

impl std::fmt::Display for CombinationId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A template frequency combination. `rows` holds the per-class selection
/// and is only consulted (and required) for [`CombinationId::Cb4`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Combination {
    pub id: CombinationId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<Vec<Component>>>,
}

impl Combination {
    pub fn new(id: CombinationId) -> Self {
        Combination { id, rows: None }
    }

    pub fn cb4(rows: Vec<Vec<Component>>) -> Self {
        Combination {
            id: CombinationId::Cb4,
            rows: Some(rows),
        }
    }

    /// The hand-picked Cb4 selection for [`reference_gait_set`]: each row
    /// drops the sideband that collides with another target's stride comb.
    pub fn reference_cb4() -> Self {
        use Component::*;
        Combination::cb4(vec![
            vec![FrameRate, SecondHarmonic, UpperSideband],
            vec![FrameRate, LowerSideband, UpperSideband],
            vec![FrameRate, LowerSideband, SecondHarmonic],
            vec![FrameRate, LowerSideband, UpperSideband],
        ])
    }

    /// Combination by id, using [`Combination::reference_cb4`] for Cb4.
    pub fn standard(id: CombinationId) -> Self {
        match id {
            CombinationId::Cb4 => Combination::reference_cb4(),
            other => Combination::new(other),
        }
    }

    /// Symbolic components for the target at `row` (0-based).
    pub fn components(&self, row: usize) -> Result<Vec<Component>> {
        use Component::*;
        Ok(match self.id {
            CombinationId::Cb1 => vec![FrameRate],
            CombinationId::Cb2 => vec![FrameRate, LowerSideband, UpperSideband],
            CombinationId::Cb3 => vec![FrameRate, LowerSideband, UpperSideband, SecondHarmonic],
            CombinationId::Harmonic2 => vec![FrameRate, SecondHarmonic],
            CombinationId::Cb4 => {
                let rows = self.rows.as_ref().ok_or_else(|| {
                    Error::param("combination", "cb4 requires explicit per-class rows")
                })?;
                let selected = rows.get(row).ok_or_else(|| {
                    Error::param(
                        "combination",
                        format!("cb4 has {} rows, no row for target {}", rows.len(), row + 1),
                    )
                })?;
                if selected.is_empty() {
                    return Err(Error::param(
                        "combination",
                        format!("cb4 row {} is empty", row + 1),
                    ));
                }
                selected.clone()
            }
        })
    }
}

fn check_compatible(spec: &StimulusSpec, id: CombinationId) -> Result<()> {
    let ok = match id {
        CombinationId::Harmonic2 => spec.kind != StimulusKind::Gait,
        _ => spec.kind == StimulusKind::Gait,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::IncompatibleCombination {
            combination: id.to_string(),
            kind: spec.kind.as_str().to_string(),
        })
    }
}

/// Template frequencies of target `row` (0-based position in the stimulus
/// set) under `comb`. Order follows the combination's component order with
/// duplicates removed.
pub fn component_frequencies(
    spec: &StimulusSpec,
    comb: &Combination,
    row: usize,
) -> Result<Vec<f64>> {
    spec.validate()?;
    check_compatible(spec, comb.id)?;
    let mut out: Vec<f64> = Vec::new();
    for c in comb.components(row)? {
        let hz = c.frequency(spec);
        if !out
            .iter()
            .any(|&g| (g - hz).abs() <= 1e-12 * hz.abs().max(1.0))
        {
            out.push(hz);
        }
    }
    Ok(out)
}

/// A template frequency of one target sitting on a stride harmonic of another.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Confound {
    /// 1-based target whose template holds the frequency.
    pub class: usize,
    pub frequency_hz: f64,
    /// 1-based target whose stride comb it collides with.
    pub other_class: usize,
    pub multiple: u32,
}

/// Reports every template frequency of one target that lies within
/// `tolerance_hz` of `m * f_other` (1 <= m <= `max_multiple`) for some other
/// target's stride frequency.
pub fn detect_confounds(
    specs: &[StimulusSpec],
    comb: &Combination,
    tolerance_hz: f64,
    max_multiple: u32,
) -> Result<Vec<Confound>> {
    let mut hits = Vec::new();
    if specs.len() < 2 {
        return Ok(hits);
    }
    for (a, spec_a) in specs.iter().enumerate() {
        let freqs = component_frequencies(spec_a, comb, a)?;
        for &g in &freqs {
            for (b, spec_b) in specs.iter().enumerate() {
                if a == b {
                    continue;
                }
                spec_b.validate()?;
                for m in 1..=max_multiple {
                    if (g - spec_b.stride_harmonic(m)).abs() <= tolerance_hz {
                        hits.push(Confound {
                            class: a + 1,
                            frequency_hz: g,
                            other_class: b + 1,
                            multiple: m,
                        });
                    }
                }
            }
        }
    }
    Ok(hits)
}

/// JSON record of one target with its derived rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StimulusRecord {
    pub kind: StimulusKind,
    pub position: Position,
    #[serde(rename = "N")]
    pub n: u32,
    pub refresh_rate_hz: f64,
    pub images_per_cycle: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_rate_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride_frequency_hz: Option<f64>,
}

impl StimulusRecord {
    pub fn from_spec(spec: &StimulusSpec) -> Result<Self> {
        Ok(StimulusRecord {
            kind: spec.kind,
            position: spec.position,
            n: spec.n_frames_per_image,
            refresh_rate_hz: spec.refresh_rate_hz,
            images_per_cycle: spec.images_per_cycle,
            frame_rate_hz: Some(frame_rate(spec)?),
            stride_frequency_hz: Some(stride_frequency(spec)?),
        })
    }

    /// Derived rates in the record are informational and recomputed.
    pub fn to_spec(&self) -> Result<StimulusSpec> {
        let spec = StimulusSpec {
            kind: self.kind,
            n_frames_per_image: self.n,
            refresh_rate_hz: self.refresh_rate_hz,
            images_per_cycle: self.images_per_cycle,
            position: self.position,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<StimulusSpec> for StimulusRecord {
    fn from(spec: StimulusSpec) -> Self {
        StimulusRecord {
            kind: spec.kind,
            position: spec.position,
            n: spec.n_frames_per_image,
            refresh_rate_hz: spec.refresh_rate_hz,
            images_per_cycle: spec.images_per_cycle,
            frame_rate_hz: frame_rate(&spec).ok(),
            stride_frequency_hz: stride_frequency(&spec).ok(),
        }
    }
}

impl TryFrom<StimulusRecord> for StimulusSpec {
    type Error = Error;

    fn try_from(record: StimulusRecord) -> Result<Self> {
        record.to_spec()
    }
}

pub fn stimulus_set_records(specs: &[StimulusSpec]) -> Result<Vec<StimulusRecord>> {
    specs.iter().map(StimulusRecord::from_spec).collect()
}

pub fn stimulus_set_to_json(specs: &[StimulusSpec]) -> Result<String> {
    Ok(serde_json::to_string_pretty(&stimulus_set_records(specs)?)?)
}

pub fn stimulus_set_from_json(text: &str) -> Result<Vec<StimulusSpec>> {
    let records: Vec<StimulusRecord> = serde_json::from_str(text)?;
    records.iter().map(StimulusRecord::to_spec).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: u32, ipc: u32) -> StimulusSpec {
        StimulusSpec {
            kind: if ipc == 1 {
                StimulusKind::Flicker
            } else {
                StimulusKind::Gait
            },
            n_frames_per_image: n,
            refresh_rate_hz: 60.0,
            images_per_cycle: ipc,
            position: Position::Left,
        }
    }

    #[test]
    fn frame_rates_from_n() {
        assert!((frame_rate(&spec(7, 16)).unwrap() - 60.0 / 7.0).abs() < 1e-15);
        assert!((frame_rate(&spec(7, 16)).unwrap() - 8.57).abs() < 5e-3);
        assert_eq!(frame_rate(&spec(4, 16)).unwrap(), 15.0);
        assert_eq!(frame_rate(&spec(60, 16)).unwrap(), 1.0);
    }

    #[test]
    fn stride_frequencies() {
        let f = stride_frequency(&spec(7, 16)).unwrap();
        assert!((f - 60.0 / 112.0).abs() < 1e-15);
        assert!((f - 0.536).abs() < 5e-4);
        assert_eq!(stride_frequency(&spec(4, 16)).unwrap(), 0.9375);
        assert_eq!(stride_frequency(&spec(5, 1)).unwrap(), 12.0);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(frame_rate(&spec(0, 16)).is_err());
        let mut s = spec(4, 16);
        s.refresh_rate_hz = 0.0;
        assert!(stride_frequency(&s).is_err());
        s.refresh_rate_hz = -60.0;
        assert!(frame_rate(&s).is_err());
    }

    #[test]
    fn schedule_n4_six_seconds() {
        let s = build_schedule(&spec(4, 16), 6.0).unwrap();
        assert_eq!(s.frame_indices.len(), 360);
        assert_eq!(s.image_periods(), 90.0);
        assert_eq!(s.advances(), 89);
        assert_eq!(s.cycles(), 5.625);
        assert_eq!(s.cycles(), 6.0 * stride_frequency(&spec(4, 16)).unwrap());
        assert_eq!(*s.frame_indices.last().unwrap(), (89 % 16) as u32);
    }

    #[test]
    fn schedule_holds_n_frames() {
        let s = build_schedule(&spec(7, 16), 6.0).unwrap();
        assert_eq!(s.frame_indices.len(), 360);
        assert!(s.frame_indices[..7].iter().all(|&i| i == 0));
        assert_eq!(s.frame_indices[7], 1);
        // 360 = 51 * 7 + 3: truncated final block
        assert_eq!(&s.frame_indices[357..], &[51 % 16; 3]);
    }

    #[test]
    fn schedule_one_full_cycle() {
        let s = build_schedule(&spec(5, 16), 16.0 * 5.0 / 60.0).unwrap();
        assert_eq!(s.frame_indices.len(), 80);
        let expected: Vec<u32> = (0..16).flat_map(|i| [i; 5]).collect();
        assert_eq!(s.frame_indices, expected);
        assert_eq!(s.cycles(), 1.0);
    }

    #[test]
    fn schedule_rejects_bad_duration() {
        assert!(build_schedule(&spec(5, 16), 0.0).is_err());
        assert!(build_schedule(&spec(5, 16), -1.0).is_err());
        assert!(build_schedule(&spec(5, 16), f64::NAN).is_err());
    }

    #[test]
    fn cb4_row_one() {
        let set = reference_gait_set();
        let got = component_frequencies(&set[0], &Combination::reference_cb4(), 0).unwrap();
        let f_cap = 60.0 / 7.0;
        let f = 60.0 / 112.0;
        let want = [f_cap, 2.0 * f_cap, f_cap + 2.0 * f];
        assert_eq!(got.len(), 3);
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{g} vs {w}");
        }
        assert!((got[2] - 9.642857142857).abs() < 1e-9);
    }

    #[test]
    fn cb3_class_three() {
        let set = reference_gait_set();
        let got = component_frequencies(&set[2], &Combination::new(CombinationId::Cb3), 2).unwrap();
        assert_eq!(got, vec![10.0, 8.75, 11.25, 20.0]);
    }

    #[test]
    fn cb1_class_two() {
        let set = reference_gait_set();
        let got = component_frequencies(&set[1], &Combination::new(CombinationId::Cb1), 1).unwrap();
        assert_eq!(got, vec![12.0]);
    }

    #[test]
    fn exact_sideband_coincidences() {
        let set = reference_gait_set();
        assert_eq!(Component::LowerSideband.frequency(&set[0]), 7.5);
        assert_eq!(Component::UpperSideband.frequency(&set[2]), 11.25);
        assert_eq!(set[3].stride_harmonic(8), 7.5);
        assert_eq!(set[3].stride_harmonic(12), 11.25);
    }

    #[test]
    fn combination_errors() {
        let set = reference_gait_set();
        let bare_cb4 = Combination::new(CombinationId::Cb4);
        assert!(component_frequencies(&set[0], &bare_cb4, 0).is_err());
        let h2 = Combination::new(CombinationId::Harmonic2);
        assert!(matches!(
            component_frequencies(&set[0], &h2, 0),
            Err(Error::IncompatibleCombination { .. })
        ));
        let flick = set[1].with_kind(StimulusKind::Flicker);
        assert_eq!(
            component_frequencies(&flick, &h2, 1).unwrap(),
            vec![12.0, 24.0]
        );
        assert!(component_frequencies(&flick, &Combination::new(CombinationId::Cb2), 1).is_err());
        let short = Combination::cb4(vec![vec![Component::FrameRate]]);
        assert!(component_frequencies(&set[1], &short, 1).is_err());
    }

    #[test]
    fn confounds_cb2_include_reported_pair() {
        let set = reference_gait_set();
        let hits = detect_confounds(&set, &Combination::new(CombinationId::Cb2), 1e-6, 16).unwrap();
        assert!(hits.contains(&Confound {
            class: 1,
            frequency_hz: 7.5,
            other_class: 4,
            multiple: 8
        }));
        assert!(hits.contains(&Confound {
            class: 3,
            frequency_hz: 11.25,
            other_class: 4,
            multiple: 12
        }));
    }

    #[test]
    fn confounds_cb4_clean() {
        let set = reference_gait_set();
        let hits = detect_confounds(&set, &Combination::reference_cb4(), 1e-6, 16).unwrap();
        assert!(hits.is_empty(), "{hits:?}");
    }

    #[test]
    fn confounds_single_spec() {
        let set = reference_gait_set();
        let hits =
            detect_confounds(&set[..1], &Combination::new(CombinationId::Cb2), 1e-6, 16).unwrap();
        assert!(hits.is_empty());
    }

    #[test]
    fn stimulus_json_round_trip() {
        let set = reference_gait_set();
        let text = stimulus_set_to_json(&set).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v[0]["N"], 7);
        assert_eq!(v[3]["frame_rate_hz"], 15.0);
        assert_eq!(v[3]["stride_frequency_hz"], 0.9375);
        assert_eq!(v[1]["position"], "right");
        assert_eq!(stimulus_set_from_json(&text).unwrap(), set);
    }

    #[test]
    fn component_serde_names() {
        let row = serde_json::to_string(&Combination::reference_cb4().rows.unwrap()[0]).unwrap();
        assert_eq!(row, r#"["F","2F","F+2f"]"#);
    }
}
