//! CSV and text outputs.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use geql_core::cluster::StateCollapser;
use geql_core::env::terrain::TerrainWorld;

use crate::profile::elevation_profile;
use crate::run::ResultTable;
use crate::summary::summarize;
use crate::tasks::TaskSetup;

pub const RESULTS_HEADER: [&str; 6] = [
    "agent",
    "exploration",
    "trial",
    "episode",
    "reward",
    "running_avg",
];

pub fn write_results<W: Write>(table: &ResultTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULTS_HEADER)?;
    for row in table.rows() {
        w.write_record([
            row.agent.to_string(),
            row.exploration.to_string(),
            row.trial.to_string(),
            row.episode.to_string(),
            row.reward.to_string(),
            row.running_avg.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per center.
pub fn write_centers<W: Write>(collapser: &StateCollapser, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["cluster".to_string()];
    header.extend((0..collapser.dim()).map(|i| format!("x{i}")));
    w.write_record(&header)?;
    for (i, c) in collapser.centers().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(c.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// One row per `y`, one column per `x`.
pub fn write_heightmap<W: Write>(world: &TerrainWorld, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    for row in world.heights().chunks(world.size()) {
        w.write_record(row.iter().map(i32::to_string))?;
    }
    w.flush()?;
    Ok(())
}

/// `agent,quartile,step,mean_elevation` over each agent's episodes, pooled
/// across trials by episode index.
pub fn write_elevation<W: Write>(table: &ResultTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["agent", "quartile", "step", "mean_elevation"])?;
    for (a, spec) in table.agents.iter().enumerate() {
        let trials: Vec<_> = table.for_agent(a).collect();
        let episodes = trials.first().map_or(0, |t| t.elevations.len());
        if episodes < 4 {
            continue;
        }
        // quartile q holds the same episode range of every trial
        let mut grouped: Vec<Vec<i32>> = Vec::new();
        for e in 0..episodes {
            grouped.extend(trials.iter().map(|t| t.elevations[e].clone()));
        }
        let profile = elevation_profile(&grouped, 4)?;
        for (q, steps) in profile.iter().enumerate() {
            for (s, v) in steps.iter().enumerate() {
                w.write_record([
                    spec.to_string(),
                    (q + 1).to_string(),
                    s.to_string(),
                    v.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(
        File::create(&path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

/// Writes every output file of an experiment into `dir`.
pub fn write_all(dir: &Path, setup: &TaskSetup, table: &ResultTable) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_results(table, create(dir, "results.csv")?)?;
    write!(create(dir, "summary.txt")?, "{}", summarize(table))?;
    write_centers(&setup.collapser, create(dir, "collapser.csv")?)?;
    if let Some(book) = &setup.codebook {
        write_centers(book, create(dir, "codebook.csv")?)?;
    }
    if let Some(world) = &setup.world {
        write_heightmap(world, create(dir, "heightmap.csv")?)?;
        write_elevation(table, create(dir, "elevation.csv")?)?;
    }
    Ok(())
}
