//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation failure, 2 bound violation, 3 I/O error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::oracle::{oracle_slack, sample_pairs, stretch_bound, stretch_sweep, SubdivisionGraph};
use crate::patching::compute_patches;
use crate::pipeline::{preprocess, Config};
use crate::polytope::{load_off, TriangulatedPolytope};
use crate::router::Router;
use crate::shapes;
use crate::tables::{deserialize, serialize, TableSet};

pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_BOUND: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "polyroute", version, about = "Local routing on triangulated convex polytopes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Shape {
    Tetra,
    Cube,
    Octa,
    Sphere,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a mesh in OFF format.
    Gen {
        shape: Shape,
        /// Point count for sphere hulls.
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a mesh and print its metrics.
    Validate {
        mesh: PathBuf,
        /// Also report the patch decomposition for this width.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Build routing tables.
    Preprocess {
        mesh: PathBuf,
        #[arg(long, default_value_t = 0.3)]
        eps: f64,
        #[arg(long)]
        delta: Option<f64>,
        /// Pick landmarks at random with this seed instead of by degree.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Also write a JSON dump of the tables.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Route one packet.
    Route {
        tables: PathBuf,
        #[arg(long)]
        from: u32,
        #[arg(long)]
        to: u32,
        #[arg(long)]
        trace: bool,
        /// Compare with the subdivision oracle.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 16)]
        subdiv: usize,
        #[arg(long, default_value_t = 4)]
        hop_mult: usize,
    },
    /// Route random pairs and check the stretch bound; writes CSV.
    Bench {
        tables: PathBuf,
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 16)]
        subdiv: usize,
        #[arg(long, default_value_t = 4)]
        hop_mult: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError { code: EXIT_IO, message: format!("{}: {e}", path.display()) }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError { code: EXIT_VALIDATION, message: e.to_string() }
}

fn write_out(out: Option<&Path>, text: &str) -> Result<String, CliError> {
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| io_err(p, e))?;
            Ok(String::new())
        }
        None => Ok(text.to_string()),
    }
}

fn read_mesh(path: &Path) -> Result<TriangulatedPolytope, CliError> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    load_off(&bytes).map_err(invalid)
}

pub fn read_tables(path: &Path) -> Result<TableSet, CliError> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    if path.extension().is_some_and(|e| e == "json") {
        TableSet::from_json(&String::from_utf8_lossy(&bytes)).map_err(invalid)
    } else {
        deserialize(&bytes).map_err(invalid)
    }
}

fn mesh_of(set: &TableSet) -> Result<TriangulatedPolytope, CliError> {
    let m = set.mesh.as_ref().ok_or_else(|| invalid("table file carries no mesh"))?;
    TriangulatedPolytope::new(m.vertices.clone(), m.faces.clone()).map_err(invalid)
}

/// Run a parsed command; returns what to print on stdout.
pub fn execute(cli: Cli) -> Result<String, CliError> {
    let mut s = String::new();
    match cli.command {
        Command::Gen { shape, n, seed, out } => {
            let p = match shape {
                Shape::Tetra => shapes::tetrahedron(),
                Shape::Cube => shapes::cube(),
                Shape::Octa => shapes::octahedron(),
                Shape::Sphere => shapes::sphere_hull(n, seed).map_err(invalid)?,
            };
            s = write_out(out.as_deref(), &p.to_off())?;
        }
        Command::Validate { mesh, delta, json } => {
            let p = read_mesh(&mesh)?;
            let m = p.metrics();
            let mut fields = vec![
                ("vertices", p.vertex_count() as f64),
                ("faces", p.face_count() as f64),
                ("edges", p.edge_count() as f64),
                ("theta_m", m.theta_m),
                ("theta_m_vertex", m.theta_m_vertex),
                ("diameter", m.mesh_diameter),
                ("area", m.surface_area),
            ];
            if let Some(d) = delta {
                let dec = compute_patches(&p, d).map_err(invalid)?;
                fields.push(("delta", d));
                fields.push(("patches", dec.len() as f64));
                fields.push(("normal_cone_width", dec.max_width()));
            }
            if json {
                let map: serde_json::Map<_, _> = fields.iter().map(|(k, v)| (k.to_string(), serde_json::json!(v))).collect();
                s = serde_json::to_string_pretty(&map).expect("json") + "\n";
            } else {
                let _ = writeln!(s, "valid");
                for (k, v) in fields {
                    let _ = writeln!(s, "{k} {v}");
                }
            }
        }
        Command::Preprocess { mesh, eps, delta, seed, out, json } => {
            let p = read_mesh(&mesh)?;
            let cfg = Config { eps, delta, landmark_seed: seed, embed_mesh: true };
            let pre = preprocess(&p, &cfg).map_err(invalid)?;
            let bytes = serialize(&pre.tables);
            std::fs::write(&out, &bytes).map_err(|e| io_err(&out, e))?;
            if let Some(j) = json {
                std::fs::write(&j, pre.tables.to_json()).map_err(|e| io_err(&j, e))?;
            }
            let st = &pre.stats;
            let seed = seed.map_or("none".to_string(), |x| x.to_string());
            let _ = writeln!(s, "eps {}\ndelta {}\nseed {seed}", st.eps, st.delta);
            let _ = writeln!(s, "patches {}\nreps {}\nspanner_nodes {}\nspanner_edges {}", st.patches, st.reps, st.spanner_nodes, st.spanner_edges);
            let _ = writeln!(s, "steiner {}\nbridges {}\nlandmarks {}\nentries {}", st.steiner, st.bridges, st.landmarks, st.entries);
            let _ = writeln!(s, "table_bytes {}\ntheta_m {}\nd_hat {}\nwall_seconds {:.3}", bytes.len(), st.theta_m, st.d_hat, st.seconds);
        }
        Command::Route { tables, from, to, trace, oracle, subdiv, hop_mult } => {
            let set = read_tables(&tables)?;
            let p = mesh_of(&set)?;
            let r = Router::new(&p, &set, hop_mult);
            let tr = r.route(from, to).map_err(invalid)?;
            if trace {
                s.push_str(&tr.to_text());
            } else {
                let _ = writeln!(s, "hops {}\nlength {:.9}", tr.hops.len(), tr.length);
            }
            if oracle {
                let d = SubdivisionGraph::new(&p, subdiv).distance(from, to);
                let _ = writeln!(s, "oracle {d:.9}\nstretch {:.6}", tr.length / d);
            }
        }
        Command::Bench { tables, pairs, seed, subdiv, hop_mult, out } => {
            let set = read_tables(&tables)?;
            let p = mesh_of(&set)?;
            let meta = set.meta.clone().ok_or_else(|| invalid("table file carries no metadata"))?;
            let r = Router::new(&p, &set, hop_mult);
            let ps = sample_pairs(p.vertex_count(), pairs, seed);
            let coarse = SubdivisionGraph::new(&p, subdiv);
            let mu = if ps.is_empty() {
                0.0
            } else {
                let fine = SubdivisionGraph::new(&p, 4 * subdiv.max(1));
                oracle_slack(&coarse, &fine, &ps[..ps.len().min(16)])
            };
            let report = stretch_sweep(&r, &coarse, &ps, meta.eps, meta.theta_m, meta.d_hat, mu);
            s = write_out(out.as_deref(), &report.to_csv())?;
            let bad = report.violations();
            eprintln!(
                "pairs {} violations {bad} max_ratio {:.4} mean_ratio {:.4} mu {mu:.3e} d_hat {:.6} bound_factor {:.3}",
                report.rows.len(),
                report.max_ratio(),
                report.mean_ratio(),
                meta.d_hat,
                stretch_bound(meta.eps, meta.theta_m, 0.0, 1.0, 0.0)
            );
            if bad > 0 {
                print!("{s}");
                return Err(CliError { code: EXIT_BOUND, message: format!("{bad} of {} pairs violate the bound", report.rows.len()) });
            }
        }
    }
    Ok(s)
}

/// Parse `args`, run and report; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { 0 };
        }
    };
    if let Some(n) = std::env::var("POLYROUTE_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match execute(cli) {
        Ok(out) => {
            print!("{out}");
            0
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
