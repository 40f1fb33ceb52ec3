//! Per-iteration record stream shared by every solver.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Objective,
    Feasibility,
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepKind::Objective => write!(f, "objective-step"),
            StepKind::Feasibility => write!(f, "feasibility-step"),
        }
    }
}

/// One row per outer iteration. `f` and `viol` are evaluated at the point the
/// iteration acted from (the sweep endpoint for sweep-style steps), `dist` is
/// the step's driving distance (chosen-halfspace distance, sweep length, or
/// separating-halfspace distance depending on the solver) and `h` is the
/// step-size schedule value where one applies.
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub k: usize,
    pub f: f64,
    pub viol: f64,
    pub step: StepKind,
    pub h: Option<f64>,
    pub dist: f64,
    pub sweep_norm_sq: Option<f64>,
    pub inner: Option<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct IterateTrace {
    pub rows: Vec<TraceRow>,
}

impl IterateTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: TraceRow) {
        if let Some(last) = self.rows.last() {
            debug_assert!(row.k > last.k, "iteration indices must increase");
        }
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Writes the trace in the CSV layout consumed by the CLI: header row
    /// `k,f,viol,step,dist,inner`, floats at 17 significant digits, empty
    /// cells for absent optional values.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "k,f,viol,step,dist,inner")?;
        for r in &self.rows {
            let inner = r.inner.map_or(String::new(), |v| v.to_string());
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.k,
                fmt_float(r.f),
                fmt_float(r.viol),
                r.step,
                fmt_float(r.dist),
                inner
            )?;
        }
        Ok(())
    }
}

/// 17 significant digits: enough to round-trip any f64 exactly.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout_matches_contract() {
        let mut t = IterateTrace::new();
        t.push(TraceRow {
            k: 0,
            f: 0.5,
            viol: -1.0,
            step: StepKind::Objective,
            h: Some(1.0),
            dist: 0.25,
            sweep_norm_sq: None,
            inner: Some(3),
        });
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "k,f,viol,step,dist,inner");
        let row = lines.next().unwrap();
        assert!(row.starts_with("0,5.0000000000000000e-1,"));
        assert!(row.contains("objective-step"));
        assert!(row.ends_with(",3"));
    }

    #[test]
    fn float_format_roundtrips() {
        for v in [0.1, 1.0 / 3.0, 12345.678910111213, 1e-17] {
            let s = fmt_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
    }
}
