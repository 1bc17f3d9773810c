//! Per-sample metrics rows and their CSV form.

use std::io::Write;

use crate::lcs::PopulationStats;

/// Column order of every metrics file.
pub const COLUMNS: [&str; 20] = [
    "trial",
    "exploit_moves",
    "exploit_formations",
    "exploit_goal_rate",
    "probe_moves",
    "probe_formations",
    "stable_at",
    "mu",
    "psi",
    "omega",
    "tau",
    "mu_macro",
    "psi_macro",
    "omega_macro",
    "tau_macro",
    "connected_hidden",
    "hidden_nodes",
    "enabled_pct",
    "macro_count",
    "micro_count",
];

/// One sample. Means cover the trials since the previous sample. `None`
/// fields are written as empty cells.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricsRow {
    /// Trials completed, explore and exploit together.
    pub trial: u32,
    pub exploit_moves: Option<f64>,
    pub exploit_formations: Option<f64>,
    pub exploit_goal_rate: Option<f64>,
    pub probe_moves: Option<f64>,
    pub probe_formations: Option<f64>,
    /// Trial index at which the stability criterion first held.
    pub stable_at: Option<u32>,
    /// Neural and population columns; absent for the tabular learner.
    pub population: Option<PopulationStats<f64>>,
}

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl MetricsRow {
    pub fn record(&self) -> Vec<String> {
        let mut out = vec![
            self.trial.to_string(),
            cell(self.exploit_moves),
            cell(self.exploit_formations),
            cell(self.exploit_goal_rate),
            cell(self.probe_moves),
            cell(self.probe_formations),
            cell(self.stable_at),
        ];
        match &self.population {
            Some(p) => {
                out.extend(p.adapt_micro.iter().map(f64::to_string));
                out.extend(p.adapt_macro.iter().map(f64::to_string));
                out.push(p.connected_hidden.to_string());
                out.push(p.hidden_nodes.to_string());
                out.push((100.0 * p.enabled_fraction).to_string());
                out.push(p.macro_count.to_string());
                out.push(p.micro_count.to_string());
            }
            None => out.resize(COLUMNS.len(), String::new()),
        }
        out
    }
}

/// CSV writer that flushes after every row, so a crashed run keeps what it
/// had.
pub struct MetricsWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> MetricsWriter<W> {
    pub fn new(sink: W) -> csv::Result<Self> {
        let mut inner = csv::Writer::from_writer(sink);
        inner.write_record(COLUMNS)?;
        inner.flush()?;
        Ok(MetricsWriter { inner })
    }

    pub fn write(&mut self, row: &MetricsRow) -> csv::Result<()> {
        self.inner.write_record(row.record())?;
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.inner.into_inner().unwrap_or_else(|e| panic!("flushed writer failed on close: {}", e.error()))
    }
}

/// Running mean over the trials since the last sample.
#[derive(Clone, Debug, Default)]
pub(crate) struct Window {
    sum: f64,
    n: u32,
}

impl Window {
    pub(crate) fn push(&mut self, v: f64) {
        self.sum += v;
        self.n += 1;
    }

    /// Mean so far, then cleared.
    pub(crate) fn take(&mut self) -> Option<f64> {
        let m = (self.n > 0).then(|| self.sum / self.n as f64);
        *self = Window::default();
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats() -> PopulationStats<f64> {
        PopulationStats {
            macro_count: 3,
            micro_count: 7,
            adapt_micro: [0.1, 0.2, 0.3, 0.4],
            adapt_macro: [0.5, 0.6, 0.7, 0.8],
            connected_hidden: 1.5,
            enabled_fraction: 0.25,
            hidden_nodes: 2.0,
        }
    }

    #[test]
    fn header_and_row_widths_agree() {
        let full = MetricsRow { trial: 50, population: Some(stats()), ..Default::default() };
        assert_eq!(full.record().len(), COLUMNS.len());
        let bare = MetricsRow { trial: 50, exploit_moves: Some(12.5), ..Default::default() };
        let rec = bare.record();
        assert_eq!(rec.len(), COLUMNS.len());
        assert_eq!(rec[1], "12.5");
        assert!(rec[7..].iter().all(String::is_empty));
    }

    #[test]
    fn written_file_reads_back() {
        let mut w = MetricsWriter::new(Vec::new()).unwrap();
        w.write(&MetricsRow { trial: 50, stable_at: Some(40), population: Some(stats()), ..Default::default() })
            .unwrap();
        let text = String::from_utf8(w.into_inner()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), COLUMNS.join(","));
        assert_eq!(lines.next().unwrap(), "50,,,,,,40,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,1.5,2,25,3,7");
    }

    #[test]
    fn window_means_then_clears() {
        let mut w = Window::default();
        assert_eq!(w.take(), None);
        w.push(1.0);
        w.push(4.0);
        assert_eq!(w.take(), Some(2.5));
        assert_eq!(w.take(), None);
    }
}
