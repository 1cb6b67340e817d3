mod support;

use std::fs;
use std::time::Instant;

use regex::Regex;
use ultgen_core::parse_source;
use ultgen_core::scaffold::generate_scaffold;

use support::fixtures;

#[test]
fn class_a_matches_the_checked_in_files() {
    let start = Instant::now();
    let dir = fixtures().join("example");
    let unit = parse_source(&fs::read_to_string(dir.join("a.cut")).unwrap(), "a.cut").unwrap();
    let bundle = generate_scaffold(&unit, "A").unwrap();
    let names: Vec<&str> = bundle.files().map(|f| f.name.as_str()).collect();
    assert_eq!(names, ["A_test_fixture.cpp", "test_A.h", "mock_C.h"]);
    for f in bundle.files() {
        let golden = fs::read_to_string(dir.join("golden").join(&f.name)).unwrap();
        assert_eq!(f.text, golden, "{}", f.name);
    }
    assert!(start.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn class_a_has_the_expected_structure() {
    let dir = fixtures().join("example/golden");
    let fixture = fs::read_to_string(dir.join("A_test_fixture.cpp")).unwrap();
    let test = fs::read_to_string(dir.join("test_A.h")).unwrap();
    let mock = fs::read_to_string(dir.join("mock_C.h")).unwrap();

    assert!(fixture.contains("class A_TestCase : public testing::Test\n"));
    assert!(fixture.contains("void A_TestCase::SetUp()\n"));
    assert!(fixture.contains("void A_TestCase::TearDown()\n"));
    let test_f = Regex::new(r"TEST_F\(A_TestCase, (\w+)\)\n\{\n    testA->(\w+)Test\(\);\n\}").unwrap();
    let pairs: Vec<(String, String)> = test_f.captures_iter(&fixture).map(|c| (c[1].to_string(), c[2].to_string())).collect();
    assert_eq!(pairs, [("func1".into(), "func1".into()), ("func2".into(), "func2".into())]);

    assert!(test.contains("class Test_A : public A\n"));
    assert!(mock.contains("class MOCK_C : public C\n"));
    let setters: Vec<&str> = Regex::new(r"void Set(\w+)\(int value\);").unwrap().captures_iter(&mock).map(|c| c.get(1).unwrap().as_str()).collect();
    assert_eq!(setters, ["Variable1", "Variable2"]);
}

#[test]
fn method_count_matches_test_blocks() {
    let src = "class T { int a() { return 0; } void b(int x) {} bool c() { return true; } };";
    let unit = parse_source(src, "t.cut").unwrap();
    let decl = unit.class("T").unwrap();
    let b = generate_scaffold(&unit, "T").unwrap();
    let blocks = Regex::new(r"(?m)^TEST_F\(T_TestCase, \w+\)$").unwrap().find_iter(&b.fixture.text).count();
    let members = Regex::new(r"(?m)^    void \w+Test\(\);$").unwrap().find_iter(&b.test_class.text).count();
    assert_eq!(blocks, decl.methods.len());
    assert_eq!(members, decl.methods.len());
    assert_eq!(blocks, 3);
}
