//! Plain-text result tables.

use std::fmt::Write;

use crate::assembly::QuadraturePointFields;

use super::study::StudyRow;

pub const STUDY_CSV_HEADER: &str = "level,ne,dof,iter,err_b,eoc_b,err_h,eoc_h";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

/// Study table as CSV. EOC cells of the first row are empty.
pub fn study_csv(rows: &[StudyRow]) -> String {
    let mut s = String::from(STUDY_CSV_HEADER);
    s.push('\n');
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{:.6e},{},{:.6e},{}",
            r.level,
            r.ne,
            r.dof,
            r.iter,
            r.err_b,
            opt(r.eoc_b),
            r.err_h,
            opt(r.eoc_h)
        )
        .unwrap();
    }
    s
}

/// Fixed-width table for terminals.
pub fn study_table(rows: &[StudyRow]) -> String {
    let mut s = format!(
        "{:>5} {:>8} {:>9} {:>4} {:>12} {:>7} {:>12} {:>7}\n",
        "level", "ne", "dof", "iter", "err_b", "eoc_b", "err_h", "eoc_h"
    );
    for r in rows {
        writeln!(
            s,
            "{:>5} {:>8} {:>9} {:>4} {:>12.4e} {:>7} {:>12.4e} {:>7}",
            r.level,
            r.ne,
            r.dof,
            r.iter,
            r.err_b,
            r.eoc_b.map(|v| format!("{v:.2}")).unwrap_or_default(),
            r.err_h,
            r.eoc_h.map(|v| format!("{v:.2}")).unwrap_or_default(),
        )
        .unwrap();
    }
    s
}

pub const FIELD_CSV_HEADER: &str = "element,x,y,bx,by,hx,hy";

/// One line per quadrature point.
pub fn field_csv(fields: &[QuadraturePointFields<f64>]) -> String {
    let mut s = String::from(FIELD_CSV_HEADER);
    s.push('\n');
    for f in fields {
        writeln!(
            s,
            "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            f.element, f.x[0], f.x[1], f.b[0], f.b[1], f.h[0], f.h[1]
        )
        .unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let rows = vec![
            StudyRow { level: 1, ne: 128, dof: 225, iter: 5, err_b: 0.04, eoc_b: None, err_h: 0.05, eoc_h: None },
            StudyRow { level: 2, ne: 512, dof: 961, iter: 5, err_b: 0.01, eoc_b: Some(2.0), err_h: 0.0125, eoc_h: Some(2.0) },
        ];
        let csv = study_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], STUDY_CSV_HEADER);
        assert_eq!(lines[1], "1,128,225,5,4.000000e-2,,5.000000e-2,");
        assert_eq!(lines[2], "2,512,961,5,1.000000e-2,2.0000,1.250000e-2,2.0000");
        assert_eq!(study_table(&rows).lines().count(), 3);
    }
}
