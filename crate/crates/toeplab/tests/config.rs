use toeplab::config::Config;
use toeplab::report::*;
use toeplab::*;

const EXAMPLE: &str = r#"
# hermitian pair with a geometric symbol
flavor = "hermitian"
sigma_x2 = 0.6
sigma_y2 = 0.4
rho1 = 0.2
seed = 7
n = [64, 128]
symbol.family = "geometric"
symbol.ratio = 0.5
symbol_2.family = "finite"
symbol_2.values = [[0, 1.0], [1, 0.5, -0.5]]
"#;

#[test]
fn parses_spec_and_run_keys() {
    let cfg: Config = EXAMPLE.parse().unwrap();
    let spec = cfg.spec().unwrap().unwrap().validate().unwrap();
    assert_eq!(spec.flavor, Flavor::Hermitian);
    assert_eq!(spec.rho, [0.2, 0.6, -0.2, 0.2, -0.4, -0.2]);
    assert_eq!(cfg.u64("seed").unwrap(), Some(7));
    assert_eq!(cfg.usize_list("n").unwrap(), Some(vec![64, 128]));
    assert_eq!(cfg.usize("reps").unwrap(), None);

    let table = cfg.symbols().unwrap();
    let d1 = table.get(1).unwrap();
    assert_eq!(d1.value(3), C64::new(0.125, 0.0));
    let d2 = table.get(2).unwrap();
    assert_eq!(d2.value(1), C64::new(0.5, -0.5));
    assert_eq!(d2.value(2), C64::new(0.0, 0.0));
    assert!(cfg.ensemble().unwrap().spec.is_some());
}

#[test]
fn generalized_and_overrides() {
    let mut cfg: Config =
        "flavor = \"generalized\"\nbeta = 0.7\nrho = [0.1, 0.2, 0.1, 0.05, 0.15, 0.1]\n".parse().unwrap();
    let spec = cfg.spec().unwrap().unwrap();
    assert_eq!(spec.sigma_x2, 0.7);
    assert_eq!(spec.rho[4], 0.15);
    cfg.set("rho5", "0.0").unwrap();
    cfg.set("word", "Tg.Tg*").unwrap();
    assert_eq!(cfg.spec().unwrap().unwrap().rho[4], 0.0);
    assert_eq!(cfg.str("word").unwrap(), Some("Tg.Tg*"));
    assert!(cfg.text.ends_with("word = Tg.Tg*\n"));
}

#[test]
fn rejections() {
    assert!(matches!("nonsense = 1".parse::<Config>(), Err(Error::Config(_))));
    assert!(matches!("flavor = ".parse::<Config>(), Err(Error::Config(_))));
    let cfg: Config = "rho1 = 0.1".parse().unwrap();
    assert!(cfg.spec().is_err());
    let cfg: Config = "symbol.ratio = 0.5".parse().unwrap();
    assert!(cfg.symbols().is_err());
    let cfg: Config = "flavor = \"hermitian\"\nsigma_x2 = \"x\"".parse().unwrap();
    assert!(cfg.spec().is_err());
    let cfg: Config = "symbol.family = \"poly\"\nsymbol.exponent = 0.8".parse().unwrap();
    assert!(cfg.symbols().is_err());
    let mut cfg = Config::empty();
    assert!(cfg.set("bogus", "1").is_err());
    let cfg: Config = "flavor = \"sideways\"".parse().unwrap();
    assert!(cfg.spec().is_err());
}

#[test]
fn provenance_and_tables() {
    let prov = Provenance::new(EXAMPLE, 7);
    assert_eq!(prov.config_hash.len(), 64);
    assert_eq!(config_hash(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    let mut t = CsvTable::new(&["n", "value"]);
    t.push(vec!["64".into(), num(0.25)]);
    t.push(vec!["128".into(), num(1.0 / 3.0)]);
    let s = t.to_string(&prov);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], prov.comment());
    assert!(lines[0].contains("seed=7") && lines[0].contains(VERSION));
    assert_eq!(lines[1], "n,value");
    assert_eq!(lines[3], "128,0.3333333333333333");
    assert_eq!(s, t.to_string(&prov));

    let json: serde_json::Value = serde_json::from_str(&to_json(&prov, &vec![1, 2])).unwrap();
    assert_eq!(json["provenance"]["seed"], 7);
    assert_eq!(json["result"][1], 2);
}
