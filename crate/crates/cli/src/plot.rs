//! Plot-data files for the per-epoch Hellinger and stability series.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use qstab::StabilityReport;

pub const HELLINGER_FILE: &str = "hellinger.csv";
pub const STABILITY_FILE: &str = "stability.csv";
pub const SCRIPT_FILE: &str = "stability.gp";

fn hellinger_table(report: &StabilityReport) -> String {
    let mut out = String::from("epoch,label,hellinger,hellinger_stderr,hellinger_max\n");
    for (k, e) in report.epochs.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            k + 1,
            e.label,
            e.hellinger,
            e.hellinger_stderr,
            report.summary.hellinger_max
        );
    }
    out
}

fn stability_table(report: &StabilityReport) -> String {
    let mut out = String::from("epoch,label,stability,bound,s_tol,mean_obs,mean_obs_stderr\n");
    for (k, e) in report.epochs.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            k + 1,
            e.label,
            e.stability,
            e.bound,
            report.config.s_tol,
            e.mean_obs,
            e.mean_obs_stderr
        );
    }
    out
}

const SCRIPT: &str = r#"# gnuplot -p stability.gp
set datafile separator ","
set key autotitle columnhead
set xlabel "month"
set multiplot layout 2,1
set ylabel "Hellinger distance"
plot "hellinger.csv" using 1:3:4 with yerrorbars title "H", \
     "" using 1:5 with lines dashtype 2 title "H_max"
set ylabel "stability"
plot "stability.csv" using 1:3 with linespoints title "s", \
     "" using 1:4 with lines title "bound at H", \
     "" using 1:5 with lines dashtype 2 title "s_tol"
unset multiplot
"#;

/// Writes the two series and a gnuplot script into `dir`, creating it if needed.
pub fn write_plot_data(dir: &Path, report: &StabilityReport) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(HELLINGER_FILE), hellinger_table(report))?;
    fs::write(dir.join(STABILITY_FILE), stability_table(report))?;
    fs::write(dir.join(SCRIPT_FILE), SCRIPT)
}
