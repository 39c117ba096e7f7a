use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use magsample::image::Image;
use magsample::rankme::EmbeddingSet;

const DU: &str = "#msdist v1\nrange 0.25 2.0\natom 0.25 0.25\natom 0.5 0.25\natom 1.0 0.25\natom 2.0 0.25\n";
const CU: &str = "#msdist v1\nrange 0.25 2.0\ndensity 1\n1\n";

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, contents: &str) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, contents).unwrap();
        p
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_magsample"))
            .args(args)
            .current_dir(self.dir.path())
            .env("RUST_LOG", "off")
            .output()
            .unwrap()
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.path(name)).unwrap()
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Parses a summary CSV into `(label, min, total)` rows.
fn summary_rows(text: &str) -> Vec<(String, f64, f64)> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("strategy,min,argmin,total,mean"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect()
}

fn manifest_without_version(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with("tool_version "))
        .map(|l| format!("{l}\n"))
        .collect()
}

#[test]
fn kernel_curve_argmax_at_midpoint() {
    let ws = Workspace::new();
    let o = ws.run(&["kernel", "--kernel", "abs", "--range", "0.25:2.0", "--grid", "1001", "--out", "k.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = ws.read("k.csv");
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x_mpp,transfer_potential"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (x, v) = l.split_once(',').unwrap();
            (x.parse().unwrap(), v.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 1001);
    let best = rows.iter().fold(rows[0], |b, r| if r.1 > b.1 { *r } else { b });
    assert_eq!(best.0, 1.125);
    assert!(text.ends_with('\n') && !text.contains('\r'));

    let manifest = ws.read("k.csv.manifest.txt");
    assert!(manifest.contains("subcommand kernel\n"));
    assert!(manifest.contains("param.grid 1001\n"));
    assert!(manifest.contains("param.kernel abs\n"));
}

#[test]
fn kernel_usage_errors() {
    let ws = Workspace::new();
    assert_eq!(code(&ws.run(&["kernel", "--grid", "1"])), 2);
    let o = ws.run(&["kernel", "--kernel", "custom:missing.csv"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("missing.csv"));
    assert_eq!(code(&ws.run(&["kernel", "--kernel", "gauss"])), 2);
    assert_eq!(code(&ws.run(&["kernel", "--range", "2.0:0.25"])), 2);
}

#[test]
fn custom_kernel_file_is_digested() {
    let ws = Workspace::new();
    let mut csv = String::from("x,y,value\n");
    for x in [0.25, 1.0, 2.0] {
        for y in [0.25, 1.0, 2.0] {
            csv.push_str(&format!("{x},{y},{}\n", 1.0 / (1.0 + f64::abs(x - y))));
        }
    }
    ws.write("k.csv", &csv);
    let o = ws.run(&["kernel", "--kernel", "custom:k.csv", "--grid", "11", "--out", "tp.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let manifest = ws.read("tp.csv.manifest.txt");
    let digest = format!("{:016x}", magsample::manifest::fnv1a64(csv.as_bytes()));
    assert!(manifest.contains(&format!("input.kernel.fnv1a64 {digest}\n")), "{manifest}");
}

#[test]
fn signal_summaries_match_theory_table() {
    let ws = Workspace::new();
    ws.write("du.msdist", DU);
    ws.write("cu.msdist", CU);
    let o = ws.run(&["signal", "--dist", "du.msdist", "--kernel", "info", "--out", "du.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (_, min, total) = summary_rows(&ws.read("du.summary.csv"))[0].clone();
    assert!((min - 0.286).abs() < 0.01 && (total - 0.560).abs() < 0.01);
    assert!(ws.path("du.csv.manifest.txt").exists());
    assert!(ws.path("du.summary.csv.manifest.txt").exists());
    assert!(ws.read("du.csv").starts_with("y_mpp,signal\n"));

    assert_eq!(code(&ws.run(&["signal", "--dist", "cu.msdist", "--out", "cu.csv"])), 0);
    let (_, min, total) = summary_rows(&ws.read("cu.summary.csv"))[0].clone();
    assert!((min - 0.126).abs() < 0.005 && (total - 0.731).abs() < 0.005);
}

#[test]
fn signal_input_errors() {
    let ws = Workspace::new();
    ws.write("empty.msdist", "");
    assert_eq!(code(&ws.run(&["signal", "--dist", "empty.msdist"])), 2);
    ws.write("bad.msdist", "#msdist v1\nrange 0.25 2.0\natom 0.5 0.5\natom 1.0 oops\n");
    let o = ws.run(&["signal", "--dist", "bad.msdist"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("bad.msdist:4"), "{}", stderr(&o));
    assert_eq!(code(&ws.run(&["signal", "--dist", "nowhere.msdist"])), 2);
    ws.write("du.msdist", DU);
    assert_eq!(code(&ws.run(&["signal", "--dist", "du.msdist", "--range", "0.5:2.0"])), 2);
}

#[test]
fn optimize_and_compare_reproduce_table() {
    let ws = Workspace::new();
    ws.write("du.msdist", DU);
    ws.write("cu.msdist", CU);
    let o = ws.run(&["optimize", "--objective", "maxmin", "--kernel", "info", "--out", "maxmin.msdist"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = ws.read("maxmin.msdist");
    let t: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# achieved_t "))
        .expect("achieved_t comment")
        .parse()
        .unwrap();
    assert!((t - 0.322).abs() < 0.01);
    let o = ws.run(&["optimize", "--objective", "maxavg", "--lambda", "1.0", "--out", "maxavg.msdist"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let o = ws.run(&["compare", "cu.msdist", "du.msdist", "maxmin.msdist", "maxavg.msdist", "--out", "table.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = summary_rows(&ws.read("table.csv"));
    let expected = [("cu", 0.126, 0.731), ("du", 0.286, 0.560), ("maxmin", 0.322, 0.570), ("maxavg", 0.102, 0.755)];
    assert_eq!(rows.len(), 4);
    for ((label, min, total), (e_label, e_min, e_total)) in rows.iter().zip(expected) {
        assert_eq!(label, e_label);
        assert!((min - e_min).abs() <= 0.015, "{label} min {min}");
        assert!((total - e_total).abs() <= 0.015, "{label} total {total}");
    }
}

#[test]
fn compare_arity_and_duplicates() {
    let ws = Workspace::new();
    ws.write("du.msdist", DU);
    assert_eq!(code(&ws.run(&["compare", "du.msdist"])), 2);
    assert_eq!(code(&ws.run(&["compare", "du.msdist", "du.msdist", "--out", "c.csv"])), 0);
    let rows = summary_rows(&ws.read("c.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], rows[1]);
}

#[test]
fn optimize_usage_errors() {
    let ws = Workspace::new();
    assert_eq!(code(&ws.run(&["optimize", "--objective", "maxavg", "--lambda", "0"])), 2);
    assert_eq!(code(&ws.run(&["optimize", "--objective", "maxmin", "--grid", "5"])), 2);
    assert_eq!(code(&ws.run(&["optimize"])), 2);
}

#[test]
fn plans_are_byte_identical() {
    let ws = Workspace::new();
    ws.write("cu.msdist", CU);
    let args = |out: &'static str| {
        vec![
            "plan", "--dist", "cu.msdist", "--n", "500", "--seed", "7", "--patch-size", "224", "--source-size", "512",
            "--standards", "0.25,0.5,1.0,2.0", "--out", out,
        ]
    };
    assert_eq!(code(&ws.run(&args("a.csv"))), 0);
    assert_eq!(code(&ws.run(&args("a2.csv"))), 0);
    assert_eq!(fs::read(ws.path("a.csv")).unwrap(), fs::read(ws.path("a2.csv")).unwrap());

    // Same output path twice: outputs and manifests are identical.
    let first_manifest = manifest_without_version(&ws.path("a.csv.manifest.txt"));
    assert_eq!(code(&ws.run(&args("a.csv"))), 0);
    assert_eq!(manifest_without_version(&ws.path("a.csv.manifest.txt")), first_manifest);
    assert!(first_manifest.contains("seed 7\n"));

    let plan = magsample::sampler::read_plan_file(ws.path("a.csv")).unwrap();
    assert_eq!(plan.len(), 500);
    assert!(ws.read("a.csv").starts_with(
        "index,target_mpp,source_mpp,source_size_px,crop_size_px,output_size_px,offset_x_frac,offset_y_frac\n"
    ));
}

#[test]
fn plan_misconfiguration() {
    let ws = Workspace::new();
    ws.write("cu.msdist", CU);
    let o = ws.run(&["plan", "--dist", "cu.msdist", "--n", "5", "--seed", "1", "--standards", "0.5,1.0,2.0"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("0.25"), "{}", stderr(&o));
    let o = ws.run(&["plan", "--dist", "cu.msdist", "--n", "5", "--seed", "1", "--source-size", "256"]);
    assert_eq!(code(&o), 2);
    assert_eq!(code(&ws.run(&["plan", "--dist", "cu.msdist", "--n", "0", "--seed", "1"])), 2);
}

#[test]
fn crop_apply_from_plan() {
    let ws = Workspace::new();
    ws.write("cu.msdist", CU);
    assert_eq!(
        code(&ws.run(&["plan", "--dist", "cu.msdist", "--n", "3", "--seed", "5", "--out", "plan.csv"])),
        0
    );
    let img = Image::from_fn(512, 512, 3, |y, x, c| (y + 2 * x + c) as f32);
    img.write_raw(fs::File::create(ws.path("src.raw")).unwrap()).unwrap();
    let o = ws.run(&["crop-apply", "--image", "src.raw", "--plan", "plan.csv", "--index", "2", "--out", "out.raw"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = Image::read_raw_file(ws.path("out.raw")).unwrap();
    assert_eq!((out.height(), out.width(), out.channels()), (224, 224, 3));
    assert!(ws.path("out.raw.manifest.txt").exists());

    assert_eq!(
        code(&ws.run(&["crop-apply", "--image", "src.raw", "--plan", "plan.csv", "--index", "9"])),
        2
    );
    let small = Image::from_fn(100, 100, 1, |_, _, _| 0.0);
    small.write_raw(fs::File::create(ws.path("small.raw")).unwrap()).unwrap();
    assert_eq!(
        code(&ws.run(&["crop-apply", "--image", "small.raw", "--plan", "plan.csv", "--index", "0"])),
        2
    );
}

fn embeddings(ws: &Workspace) -> PathBuf {
    let mut rows = Vec::new();
    let mut mpps = Vec::new();
    for (g, mpp) in [0.25, 0.5, 1.0].iter().enumerate() {
        for i in 0..20 {
            let mut v = vec![0.0; 6];
            v[g] = 1.0 + i as f64 * 0.1;
            v[(g + 1 + i % 3) % 6] += 0.5;
            v[5] = 1.0;
            rows.extend(v);
            mpps.push(*mpp);
        }
    }
    let set = EmbeddingSet::new((0..60).map(|i| format!("p{i}")).collect(), mpps, 6, rows).unwrap();
    let path = ws.path("emb.csv");
    set.write_csv(fs::File::create(&path).unwrap()).unwrap();
    let mut bin = Vec::new();
    set.write_binary(&mut bin).unwrap();
    fs::write(ws.path("emb.bin"), bin).unwrap();
    path
}

#[test]
fn rankme_and_similarity() {
    let ws = Workspace::new();
    embeddings(&ws);
    let o = ws.run(&["rankme", "--embeddings", "emb.csv", "--out", "rankme.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = ws.read("rankme.csv");
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("mpp,count,rankme"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][0], "0.25");
    assert_eq!(rows[0][1], "20");

    // The binary form gives the same profile.
    assert_eq!(code(&ws.run(&["rankme", "--embeddings", "emb.bin", "--out", "rankme_bin.csv"])), 0);
    let bin_rows: Vec<f64> = ws
        .read("rankme_bin.csv")
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    for (row, b) in rows.iter().zip(bin_rows) {
        let a: f64 = row[2].parse().unwrap();
        assert!((a - b).abs() < 1e-5 * a);
    }

    let o = ws.run(&["similarity", "--embeddings", "emb.csv", "--out", "sim.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let sim = ws.read("sim.csv");
    let lines: Vec<&str> = sim.lines().collect();
    assert_eq!(lines[0], "mpp,0.25,0.5,1");
    assert!(lines[1].starts_with("0.25,1,"));
    assert_eq!(lines.len(), 4);
}

#[test]
fn rankme_failures() {
    let ws = Workspace::new();
    ws.write("zeros.csv", "id,mpp,d0,d1\na,0.5,0,0\nb,0.5,0,0\n");
    let o = ws.run(&["rankme", "--embeddings", "zeros.csv"]);
    assert_eq!(code(&o), 1);
    ws.write("bad.csv", "id,mpp,x0\na,0.5,1\n");
    assert_eq!(code(&ws.run(&["rankme", "--embeddings", "bad.csv"])), 2);
    assert_eq!(code(&ws.run(&["similarity", "--embeddings", "zeros.csv"])), 1);
    assert_eq!(code(&ws.run(&["rankme", "--embeddings", "missing.csv"])), 2);
}

#[test]
fn help_lists_subcommands() {
    let ws = Workspace::new();
    let o = ws.run(&["--help"]);
    assert_eq!(code(&o), 0);
    let help = String::from_utf8_lossy(&o.stdout);
    for sub in ["kernel", "signal", "compare", "optimize", "plan", "rankme", "similarity", "crop-apply"] {
        assert!(help.contains(sub), "help lacks {sub}");
    }
}
