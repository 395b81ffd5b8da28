use serde::Serialize;
use superscs::{ConicProblem, Solution, SolveOutcome};

/// Bumped whenever a field is renamed or removed.
pub const SCHEMA_VERSION: u32 = 1;

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub status: &'static str,
    pub objective: Option<f64>,
    pub pr: Option<f64>,
    pub dr: Option<f64>,
    pub gap: Option<f64>,
    pub ic: Option<f64>,
    pub uc: Option<f64>,
    pub iterations: usize,
    pub projections: u64,
    pub linsolves: u64,
    pub seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<f64>>,
}

impl Report {
    pub fn new(problem: &ConicProblem, out: &SolveOutcome) -> Self {
        let (x, y, s) = match &out.solution {
            Solution::Optimal(t) => (Some(t.x.clone()), Some(t.y.clone()), Some(t.s.clone())),
            Solution::Infeasibility { y } => (None, Some(y.clone()), None),
            Solution::Unboundedness { x, s } => (Some(x.clone()), None, Some(s.clone())),
            Solution::None => (None, None, None),
        };
        let m = &out.metrics;
        Self {
            schema_version: SCHEMA_VERSION,
            status: out.status.as_str(),
            objective: out.objective(problem),
            pr: finite(m.pr),
            dr: finite(m.dr),
            gap: finite(m.gap),
            ic: finite(m.ic),
            uc: finite(m.uc),
            iterations: out.stats.iterations,
            projections: out.stats.projections,
            linsolves: out.stats.linear_solves,
            seconds: out.stats.wall_time,
            x,
            y,
            s,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable") + "\n"
    }

    /// Header plus one row of scalar fields.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|v| format!("{v:e}")).unwrap_or_default();
        format!(
            "schema_version,status,objective,pr,dr,gap,ic,uc,iterations,projections,linsolves,seconds\n\
             {},{},{},{},{},{},{},{},{},{},{},{}\n",
            self.schema_version,
            self.status,
            opt(self.objective),
            opt(self.pr),
            opt(self.dr),
            opt(self.gap),
            opt(self.ic),
            opt(self.uc),
            self.iterations,
            self.projections,
            self.linsolves,
            self.seconds
        )
    }
}
