//! Machine (JSON) and human (aligned text) forms of a certificate.
//!
//! Interval endpoints are printed as decimal strings rounded outward, so a
//! printed interval always contains the computed one.

use serde::{Deserialize, Serialize};

use crate::decimal::{compare_decimal, format_down, format_up};
use crate::interval::{Interval, IntervalVector};
use crate::pipeline::{BlowUpCertificate, Timings, Verdict};

/// `[lo, hi]` as outward-rounded decimal strings.
pub type Enclosure = [String; 2];

pub fn enclosure(v: Interval) -> Enclosure {
    [format_down(v.lo()), format_up(v.hi())]
}

fn boxed(v: &IntervalVector) -> Vec<Enclosure> {
    v.iter().map(|x| enclosure(*x)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub setup_s: f64,
    pub equilibrium_s: f64,
    pub integration_s: f64,
    pub lyapunov_s: f64,
    pub total_s: f64,
}

impl From<&Timings> for TimingReport {
    fn from(t: &Timings) -> Self {
        TimingReport {
            setup_s: t.setup,
            equilibrium_s: t.equilibrium,
            integration_s: t.integration,
            lyapunov_s: t.lyapunov,
            total_s: t.total,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub problem: String,
    pub dim: usize,
    pub degree: u32,
    pub kind: Option<String>,
    pub verdict: String,
    pub stage: Option<String>,
    pub reason: Option<String>,
    pub x_star: Option<Vec<Enclosure>>,
    pub blowup_pattern: Option<Vec<bool>>,
    pub eigenvalue_disks: Option<Vec<Enclosure>>,
    pub a_spectrum: Option<Enclosure>,
    pub c1: Option<Enclosure>,
    pub c_n: Option<Enclosure>,
    pub lambda_max_y: Option<String>,
    pub epsilon: Option<Enclosure>,
    pub tau_n: Option<Enclosure>,
    pub t_n: Option<Enclosure>,
    pub l_n_hi: Option<String>,
    pub tail_hi: Option<String>,
    pub t_max: Option<Enclosure>,
    pub t_max_width: Option<f64>,
    pub steps: usize,
    pub timings: TimingReport,
}

impl Report {
    pub fn from_certificate(c: &BlowUpCertificate) -> Report {
        let (stage, reason) = match &c.verdict {
            Verdict::BlowUpValidated => (None, None),
            Verdict::Failed { stage, reason } => (Some(stage.to_string()), Some(reason.clone())),
        };
        let l = c.lyapunov.as_ref();
        Report {
            problem: c.problem.clone(),
            dim: c.dim,
            degree: c.degree,
            kind: c.kind.map(|k| k.to_string()),
            verdict: if c.verdict.is_validated() { "BlowUpValidated".into() } else { "Failed".into() },
            stage,
            reason,
            x_star: c.equilibrium.as_ref().map(|e| boxed(&e.enclosure)),
            blowup_pattern: c.blowup_pattern(),
            eigenvalue_disks: c.jacobian_disks.as_ref().map(|d| d.iter().map(|v| enclosure(*v)).collect()),
            a_spectrum: l.map(|l| [format_down(l.a_bounds.0), format_up(l.a_bounds.1)]),
            c1: l.map(|l| enclosure(l.c1)),
            c_n: l.map(|l| enclosure(l.c_n)),
            lambda_max_y: l.map(|l| format_up(l.lambda_max_y)),
            epsilon: l.map(|l| enclosure(l.epsilon)),
            tau_n: c.tau_n.map(enclosure),
            t_n: c.t_n.map(enclosure),
            l_n_hi: c.l_n.map(|v| format_up(v.hi())),
            tail_hi: c.tail.map(|v| format_up(v.hi())),
            t_max: c.t_max.map(enclosure),
            t_max_width: c.t_max.map(|v| v.width()),
            steps: c.steps,
            timings: TimingReport::from(&c.timings),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let pair = |e: &Enclosure| format!("[{}, {}]", e[0], e[1]);
        let mut rows: Vec<(&str, String)> = vec![
            ("problem", self.problem.clone()),
            ("dimension", self.dim.to_string()),
            ("degree", self.degree.to_string()),
            ("compactification", self.kind.clone().unwrap_or_else(|| "-".into())),
        ];
        match (&self.stage, &self.reason) {
            (Some(s), Some(r)) => rows.push(("verdict", format!("Failed at {s}: {r}"))),
            _ => rows.push(("verdict", self.verdict.clone())),
        }
        if let Some(x) = &self.x_star {
            for (i, v) in x.iter().enumerate() {
                rows.push((if i == 0 { "x*" } else { "" }, pair(v)));
            }
        }
        if let Some(d) = &self.eigenvalue_disks {
            for (i, v) in d.iter().enumerate() {
                rows.push((if i == 0 { "Re λ(Dg(x*))" } else { "" }, pair(v)));
            }
        }
        let mut opt = |k: &'static str, v: &Option<Enclosure>| {
            if let Some(v) = v {
                rows.push((k, pair(v)));
            }
        };
        opt("λ(A) over Ñ", &self.a_spectrum);
        opt("c1", &self.c1);
        opt("cN", &self.c_n);
        opt("ε", &self.epsilon);
        opt("τ_N", &self.tau_n);
        opt("t_N", &self.t_n);
        if let Some(v) = &self.lambda_max_y {
            rows.push(("λmax(Y) ≤", v.clone()));
        }
        if let Some(v) = &self.l_n_hi {
            rows.push(("L(x(τ_N)) ≤", v.clone()));
        }
        if let Some(v) = &self.tail_hi {
            rows.push(("t_max − t_N ≤", v.clone()));
        }
        if let Some(v) = &self.t_max {
            rows.push(("t_max ∈", pair(v)));
        }
        if let Some(w) = self.t_max_width {
            rows.push(("width", format!("{w:.3e}")));
        }
        rows.push(("steps", self.steps.to_string()));
        rows.push(("time", format!("{:.2}s", self.timings.total_s)));
        let w = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
        rows.iter()
            .map(|(k, v)| format!("{k}{}  {v}\n", " ".repeat(w - k.chars().count())))
            .collect()
    }
}

/// Simple aligned table; every row must have as many cells as `header`.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        assert_eq!(r.len(), header.len(), "table row length");
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let s: Vec<String> = cells
            .iter()
            .zip(&width)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        format!("{}\n", s.join("  ").trim_end())
    };
    let mut out = line(header.to_vec());
    out += &line(width.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(|s| s.as_str()).collect());
    for r in rows {
        out += &line(r.iter().map(|s| s.as_str()).collect());
    }
    out
}

/// Expands the `prefix_{lower}^{upper}` digit notation used in published
/// tables of enclosures: `("0.242", "86876161046069", "90697501550363")`
/// becomes `[0.24286876161046069, 0.24290697501550363]` (as decimal strings).
pub fn expand_digit_notation(prefix: &str, lower: &str, upper: &str) -> Enclosure {
    [format!("{prefix}{lower}"), format!("{prefix}{upper}")]
}

/// Published enclosures of `t_max` for the builtin problems at their
/// default parameters, keyed by problem label.
pub fn published_enclosure(label: &str) -> Option<Enclosure> {
    let plain = |lo: &str, hi: &str| Some([lo.to_string(), hi.to_string()]);
    match label {
        "ex1(a=0.25)" => plain("3.9999713430726937", "4.0000178056561886"),
        "ex2" => plain("0.50680733588232473", "0.50682093902984382"),
        "ex3(a=-1.5,b=1.0,c=-1.25)" => plain("7.9999713368258049", "8.0005675272707962"),
        "riccati" => plain("1.4363412444327372", "1.4363623527119043"),
        "heat3(n=4)" => Some(expand_digit_notation("0.0050340400", "162383761", "784869202")),
        "heat3(n=6)" => Some(expand_digit_notation("0.00500977", "0457049421", "25547564119")),
        "heat3(n=8)" => Some(expand_digit_notation("0.005003", "7433760869625", "9439361921953")),
        "heat3(n=10)" => Some(expand_digit_notation("0.005001", "7211768978893", "9593060980734")),
        "heat3(n=12)" => Some(expand_digit_notation("0.00500", "08814990989457", "12269722264098")),
        "heat3(n=14)" => Some(expand_digit_notation("0.005000", "4463436608779", "6415371753669")),
        "heat3(n=16)" => Some(expand_digit_notation("0.00500", "0091354528135", "12389304747536")),
        "heat2(n=4)" => Some(expand_digit_notation("0.242", "86876161046069", "90697501550363")),
        "heat2(n=6)" => Some(expand_digit_notation("0.2462", "3855107071979", "4064886491729")),
        "heat2(n=8)" => Some(expand_digit_notation("0.24608", "006592024286", "664310433196")),
        "heat2(n=10)" => Some(expand_digit_notation("0.245", "78076022169118", "80239357994319")),
        "heat2(n=12)" => Some(expand_digit_notation("0.245", "55282235874756", "6169375007353")),
        "heat2(n=14)" => Some(expand_digit_notation("0.245", "39149499338358", "5655918000558")),
        _ => None,
    }
}

/// Exact test whether the decimal interval `r` meets `v`.
pub fn intersects(r: &Enclosure, v: Interval) -> bool {
    use std::cmp::Ordering::{Greater, Less};
    let lo_ok = compare_decimal(&r[0], v.hi()).is_ok_and(|o| o != Greater);
    let hi_ok = compare_decimal(&r[1], v.lo()).is_ok_and(|o| o != Less);
    lo_ok && hi_ok
}

/// Exact test whether `v` contains the decimal `x`.
pub fn contains_decimal(v: Interval, x: &str) -> bool {
    use std::cmp::Ordering::{Greater, Less};
    compare_decimal(x, v.lo()).is_ok_and(|o| o != Less) && compare_decimal(x, v.hi()).is_ok_and(|o| o != Greater)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cmp::Ordering;

    #[test]
    fn printed_enclosures_contain_values() {
        for &(a, b) in &[(0.1, 0.3), (1.0 / 3.0, 2.0 / 3.0), (-1e-17, 4.0)] {
            let e = enclosure(Interval::new(a, b));
            assert_ne!(compare_decimal(&e[0], a).unwrap(), Ordering::Greater);
            assert_ne!(compare_decimal(&e[1], b).unwrap(), Ordering::Less);
        }
    }

    #[test]
    fn digit_notation() {
        let e = expand_digit_notation("0.0050340400", "162383761", "784869202");
        assert_eq!(e[0], "0.0050340400162383761");
        assert_eq!(e[1], "0.0050340400784869202");
    }

    #[test]
    fn reference_intersection() {
        let r = published_enclosure("ex1(a=0.25)").unwrap();
        assert!(intersects(&r, Interval::new(3.0, 3.99998)));
        assert!(!intersects(&r, Interval::new(3.0, 3.9999)));
        assert!(intersects(&r, Interval::point(4.0)));
        assert!(contains_decimal(Interval::new(3.9, 4.0), "4"));
        assert!(!contains_decimal(Interval::new(3.9, 3.99), "4"));
        let h = published_enclosure("heat2(n=12)").unwrap();
        assert_eq!(h[1], "0.2456169375007353");
    }

    #[test]
    fn table_alignment() {
        let t = table(&["a", "bb"], &[vec!["xxx".into(), "y".into()]]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "a    bb");
        assert_eq!(lines[1], "---  --");
        assert_eq!(lines[2], "xxx  y");
    }
}
