use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use repro_audit::config::AuditConfig;
use repro_audit::spotcheck::{compare_outputs, random_indices, Comparator};
use repro_audit::supplement::classify_entry;
use repro_audit::{audit_supplement, scan_script};
use repro_audit_bench::{fixtures_root, numeric_table, r_script, synthetic_supplement};

fn fixtures(c: &mut Criterion) {
    let mut group = c.benchmark_group("audit_fixture");
    for name in ["fix_compliant", "fix_no_readme", "fix_missing_seed"] {
        let root = fixtures_root().join(name);
        group.bench_with_input(BenchmarkId::from_parameter(name), &root, |b, root| {
            b.iter(|| audit_supplement(root, &AuditConfig::default(), None).unwrap())
        });
    }
    group.finish();
}

fn synthetic(c: &mut Criterion) {
    let mut group = c.benchmark_group("audit_synthetic");
    group.sample_size(20);
    for scripts in [10, 100] {
        let dir = tempfile::tempdir().unwrap();
        synthetic_supplement(dir.path(), scripts).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(scripts), dir.path(), |b, root| {
            b.iter(|| audit_supplement(root, &AuditConfig::default(), None).unwrap())
        });
    }
    group.finish();
}

fn scanner(c: &mut Criterion) {
    let entry = classify_entry("code/analysis.R".to_string(), 0, None);
    let mut group = c.benchmark_group("scan_script");
    for lines in [100, 2_000] {
        let text = r_script(1, lines);
        group.bench_with_input(BenchmarkId::from_parameter(lines), &text, |b, text| {
            b.iter(|| scan_script(&entry, black_box(text)))
        });
    }
    group.finish();
}

fn comparator(c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    let expected = dir.path().join("expected.csv");
    let actual = dir.path().join("actual.csv");
    std::fs::write(&expected, numeric_table(10_000, 8, 0.0)).unwrap();
    std::fs::write(&actual, numeric_table(10_000, 8, 1e-9)).unwrap();
    c.bench_function("compare_numeric_10k_rows", |b| {
        b.iter(|| compare_outputs(&expected, &actual, Comparator::NumericTable, 1e-6, 0.0).unwrap())
    });
    c.bench_function("random_indices_1000_of_100k", |b| {
        b.iter(|| random_indices(100_000, 1_000, black_box(7)))
    });
}

criterion_group!(benches, fixtures, synthetic, scanner, comparator);
criterion_main!(benches);
