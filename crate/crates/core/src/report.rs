//! Artifact writers: state JSON, monitor/velocity/oracle CSV, report JSON.
//!
//! All writers are deterministic: identical inputs produce identical bytes.

use std::io::Write;
use std::path::Path;

use crate::asymptotics::{LimitProfile, WeakTestRow};
use crate::error::Result;
use crate::evolve::{InvariantStat, Monitors, TrajectoryRecord};
use crate::graph::SampledGraph;
use crate::velocity::VelocityField;

pub fn write_state_json(path: &Path, g: &SampledGraph) -> Result<()> {
    let mut out = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut out, g)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn write_graph_csv(path: &Path, g: &SampledGraph) -> Result<()> {
    let mut out = String::from("x,f\n");
    for i in 0..g.n {
        out.push_str(&format!("{},{}\n", g.x(i), g.values[i]));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_monitors_csv(path: &Path, m: &Monitors) -> Result<()> {
    let mut out = String::from(
        "t,mass,scaled_mass_drift,linf,slope_linf,r_linf,support_lo,support_hi,min_f_support,clamped_mass,jac_min,jac_max,u1_max_abs\n",
    );
    for k in 0..m.time.len() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            m.time[k],
            m.mass[k],
            m.scaled_mass_drift[k],
            m.linf[k],
            m.slope_linf[k],
            m.r_linf[k],
            m.support_lo[k],
            m.support_hi[k],
            m.min_f_support[k],
            m.clamped_mass[k],
            m.jac_min[k],
            m.jac_max[k],
            m.u1_max_abs[k],
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_invariants_json(path: &Path, stats: &[InvariantStat]) -> Result<()> {
    let mut out = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut out, stats)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn write_velocity_csv(path: &Path, g: &SampledGraph, vf: &VelocityField) -> Result<()> {
    let mut out = String::from("x,f,u1,u2,du1,du2,F,G,R\n");
    for i in 0..g.n {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            g.x(i),
            g.values[i],
            vf.u1[i],
            vf.u2[i],
            vf.du1[i],
            vf.du2[i],
            vf.src_f[i],
            vf.src_g[i],
            vf.damping[i],
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// One model-vs-oracle comparison row.
#[derive(Debug, Clone)]
pub struct OracleRow {
    pub x: f64,
    pub quantity: &'static str,
    pub model_value: f64,
    pub oracle_value: f64,
}

pub fn write_oracle_csv(path: &Path, rows: &[OracleRow]) -> Result<()> {
    let mut out = String::from("x,quantity,model_value,oracle_value,abs_err\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.x,
            r.quantity,
            r.model_value,
            r.oracle_value,
            (r.model_value - r.oracle_value).abs()
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_profile_json(path: &Path, profile: &LimitProfile) -> Result<()> {
    let mut out = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut out, profile)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn write_weak_csv(path: &Path, rows: &[WeakTestRow]) -> Result<()> {
    let mut out = String::from("test_fn,t,I_t,limit,gap\n");
    for r in rows {
        for (t, i_t, gap) in &r.series {
            out.push_str(&format!("{},{},{},{},{}\n", r.test_fn, t, i_t, r.limit_value, gap));
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_probe_samples_csv(path: &Path, rep: &crate::cauchy::OperatorProbeReport) -> Result<()> {
    let mut out = String::from(
        "index,theta,re_ratio,im_ratio,t_sup_ratio,t_holder_ratio,re_refinement,im_refinement,t_sup_refinement,t_holder_refinement\n",
    );
    for s in &rep.samples_detail {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            s.index,
            s.theta,
            s.re_ratio,
            s.im_ratio,
            s.t_sup_ratio,
            s.t_holder_ratio,
            s.re_refinement,
            s.im_refinement,
            s.t_sup_refinement,
            s.t_holder_refinement,
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_hausdorff_csv(path: &Path, series: &[(f64, f64)], rate: f64) -> Result<()> {
    let mut out = format!("# fitted_rate,{rate}\nt,d\n");
    for (t, d) in series {
        out.push_str(&format!("{t},{d}\n"));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_record_summary_json(path: &Path, rec: &TrajectoryRecord) -> Result<()> {
    #[derive(serde::Serialize)]
    struct Summary<'a> {
        scenario_name: &'a str,
        mode: crate::evolve::Mode,
        dt: f64,
        t_end: f64,
        snapshots: usize,
        invariants: &'a [InvariantStat],
    }
    let s = Summary {
        scenario_name: &rec.scenario_name,
        mode: rec.mode,
        dt: rec.dt,
        t_end: rec.t_end,
        snapshots: rec.snapshots.len(),
        invariants: &rec.invariants,
    };
    let mut out = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut out, &s)?;
    out.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_json_field_layout() {
        let g = SampledGraph::new(-1.0, 1.0, vec![0.0, 0.5, 0.0], 0.25).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        // flat record in declaration order
        let fields = ["x_lo", "x_hi", "n", "time", "values"];
        let mut pos = 0;
        for f in fields {
            let at = text.find(&format!("\"{f}\"")).unwrap();
            assert!(at >= pos, "field {f} out of order");
            pos = at;
        }
        let back: SampledGraph = serde_json::from_str(&text).unwrap();
        assert_eq!(back.values, g.values);
    }
}
