#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "qbm/dataset.hpp"
#include "qbm/error.hpp"
#include "qbm/fixtures.hpp"
#include "qbm/model_io.hpp"
#include "qbm/training.hpp"

using namespace qbm;

namespace {

std::set<std::string> row_strings(const Dataset& d) {
  std::set<std::string> out;
  for (const auto& r : d.rows()) {
    std::string s;
    for (auto v : r) s += static_cast<char>('0' + v);
    out.insert(s);
  }
  return out;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("qbm_test_" + name);
}

}  // namespace

TEST(Gates, TruthTables) {
  EXPECT_EQ(row_strings(logic_gate(Gate::Xor)), (std::set<std::string>{"000", "011", "101", "110"}));
  EXPECT_EQ(row_strings(logic_gate(Gate::And)), (std::set<std::string>{"000", "010", "100", "111"}));
  EXPECT_EQ(row_strings(logic_gate(Gate::Or)), (std::set<std::string>{"000", "011", "101", "111"}));
  const auto d = logic_gate(Gate::And);
  EXPECT_EQ(d.io_split(), (IoSplit{2, 1}));
  for (double w : d.weights()) EXPECT_DOUBLE_EQ(w, 0.25);
}

TEST(Adder, RowsAreBinarySums) {
  const auto d = adder2();
  ASSERT_EQ(d.size(), 16u);
  EXPECT_EQ(d.io_split(), (IoSplit{4, 3}));
  for (std::size_t r = 0; r < d.size(); ++r) {
    const auto& x = d.rows()[r];
    const int a = x[0] * 2 + x[1];
    const int b = x[2] * 2 + x[3];
    const int c = x[4] * 4 + x[5] * 2 + x[6];
    EXPECT_EQ(a + b, c);
    EXPECT_DOUBLE_EQ(d.weights()[r], 1.0 / 16.0);
  }
  EXPECT_TRUE(row_strings(d).count("0111100"));
  EXPECT_TRUE(row_strings(d).count("1111110"));
}

TEST(TwoPhase, Patterns) {
  const auto d = two_phase();
  ASSERT_EQ(d.size(), 11u);
  EXPECT_FALSE(d.io_split());
  EXPECT_TRUE(row_strings(d).count("0000000000"));
  EXPECT_TRUE(row_strings(d).count("1111111111"));
  for (const auto& r : d.rows()) {
    for (std::size_t i = 1; i < r.size(); ++i) EXPECT_LE(r[i - 1], r[i]);
  }
  EXPECT_EQ(row_strings(two_phase(1)), (std::set<std::string>{"0", "1"}));
  EXPECT_THROW(two_phase(0), InvalidArgument);
}

TEST(Dataset, Invariants) {
  EXPECT_THROW(Dataset({{0, 1}, {0, 1}}, {0.5, 0.5}), InvalidArgument);
  EXPECT_THROW(Dataset({{0, 1}, {1, 1}}, {0.5, 0.6}), InvalidArgument);
  EXPECT_THROW(Dataset({{0, 1}, {1}}, {0.5, 0.5}), InvalidArgument);
  EXPECT_THROW(Dataset({{0, 2}}, {1.0}), InvalidArgument);
  EXPECT_THROW(Dataset({{0, 1}}, {1.0}, IoSplit{1, 2}), InvalidArgument);
  EXPECT_THROW(Dataset({{0, 1}, {1, 1}}, {1.5, -0.5}), InvalidArgument);
}

TEST(Dataset, ByName) {
  EXPECT_EQ(dataset_by_name("xor"), logic_gate(Gate::Xor));
  EXPECT_EQ(dataset_by_name("two_phase:4").size(), 5u);
  EXPECT_THROW(dataset_by_name("nand"), InvalidArgument);
  EXPECT_THROW(dataset_by_name("two_phase:x"), InvalidArgument);
}

TEST(DatasetCsv, RoundTrip) {
  for (const auto& d : {logic_gate(Gate::Or), adder2(), two_phase(6)}) {
    const auto path = temp_path(d.name() + ".csv");
    save_dataset(path, d);
    auto back = load_dataset(path);
    EXPECT_EQ(back.rows(), d.rows());
    EXPECT_EQ(back.weights(), d.weights());
    EXPECT_EQ(back.io_split(), d.io_split());
    std::filesystem::remove(path);
  }
}

TEST(DatasetCsv, MissingWeightsMeansUniform) {
  const auto d = parse_dataset_csv("bit_0,bit_1\n0,1\n1,1\n1,0\n");
  for (double w : d.weights()) EXPECT_DOUBLE_EQ(w, 1.0 / 3.0);
}

TEST(DatasetCsv, ErrorsCarryLineNumbers) {
  try {
    parse_dataset_csv("# io_split=1,1\nbit_0,bit_1,weight\n0,1,0.5\n1,1,-0.5\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
  EXPECT_THROW(parse_dataset_csv("bit_0,weight\n2,1\n"), ParseError);
  EXPECT_THROW(parse_dataset_csv("bit_0,weight\n1\n"), ParseError);
  EXPECT_THROW(parse_dataset_csv("b0,weight\n1,1\n"), ParseError);
  EXPECT_THROW(parse_dataset_csv("bit_0,weight\n1,1\n1,1\n"), ParseError);
  EXPECT_THROW(parse_dataset_csv(""), ParseError);
  EXPECT_THROW(load_dataset("/nonexistent/file.csv"), InvalidArgument);
}

TEST(Fixtures, PublishedValues) {
  const auto xor_ground = load_fixture("fig4a_xor_ground");
  EXPECT_EQ(xor_ground.bias(3), 1.0);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(xor_ground.bias(i), 0.25);
    EXPECT_EQ(xor_ground.coupling(i, 3), -1.0);
  }
  EXPECT_EQ(xor_ground.coupling(0, 1), 0.5);
  EXPECT_EQ(xor_ground.coupling(1, 2), 0.5);

  const auto t3 = load_fixture("table3_two_phase");
  EXPECT_EQ(t3.size(), 18u);
  EXPECT_EQ(t3.num_visible(), 10u);
  EXPECT_NEAR(t3.bias(0), 0.7009, 1e-12);
  EXPECT_NEAR(t3.coupling(8, 9), -1.0, 1e-12);

  EXPECT_NEAR(load_fixture("fig7a_and").bias(2), 0.6791, 1e-12);

  const auto adder = load_fixture("table4_adder_function");
  EXPECT_EQ(adder.partition(), (Partition{4, 3, 10}));
  EXPECT_NEAR(adder.bias(11), -1.0693, 1e-12);
}

TEST(Fixtures, MetadataAndFlags) {
  for (const auto& name : fixture_names()) {
    const auto f = load_fixture_file(name);
    EXPECT_EQ(f.machine.basis(), Basis::ZeroOne);
    EXPECT_FALSE(f.machine.bounds().enforced) << name;
    EXPECT_TRUE(f.metadata.count("source")) << name;
    EXPECT_TRUE(f.metadata.count("dataset")) << name;
  }
  EXPECT_TRUE(load_fixture_file("table4_adder_function").metadata.count("caveat"));
  EXPECT_TRUE(load_fixture_file("table5_adder_distribution").metadata.count("caveat"));
  EXPECT_EQ(load_fixture("table4_adder_function").parameters(),
            load_fixture("table5_adder_distribution").parameters());
  EXPECT_THROW(load_fixture("table9"), InvalidArgument);
}

TEST(Fixtures, ShippedFilesMatchEmbedded) {
  const std::filesystem::path root = QBM_SOURCE_DIR;
  for (const auto& name : fixture_names()) {
    const auto on_disk = load_model(root / "fixtures" / (name + ".json"));
    const auto embedded = load_fixture_file(name);
    EXPECT_EQ(on_disk.machine, embedded.machine) << name;
    EXPECT_EQ(on_disk.metadata, embedded.metadata) << name;
  }
  for (const char* name : {"and", "or", "xor", "adder2", "two_phase"}) {
    const auto on_disk = load_dataset(root / "datasets" / (std::string(name) + ".csv"));
    const auto generated = dataset_by_name(name);
    EXPECT_EQ(on_disk.rows(), generated.rows()) << name;
    EXPECT_EQ(on_disk.weights(), generated.weights()) << name;
    EXPECT_EQ(on_disk.io_split(), generated.io_split()) << name;
  }
}

TEST(ModelIo, RoundTripWithMetadata) {
  auto bm = load_fixture("fig4b_xor_trained");
  const ModelMetadata meta{{"seed", "3"}, {"dataset", "xor"}};
  const auto path = temp_path("model.json");
  save_model(path, bm, meta);
  const auto back = load_model(path);
  EXPECT_EQ(back.machine, bm);
  EXPECT_EQ(back.metadata, meta);
  std::filesystem::remove(path);
}

TEST(ModelIo, RejectsMalformed) {
  EXPECT_THROW(model_from_json("{"), ParseError);
  EXPECT_THROW(model_from_json(R"({"basis": "01", "m_I": 1, "m_O": 0, "n": 0,
                                   "biases": [0, 1], "couplings": []})"),
               ParseError);
  EXPECT_THROW(model_from_json(R"({"basis": "01", "m_I": 2, "m_O": 0, "n": 0,
                                   "biases": [0, 1], "couplings": [[0, 0, 1]]})"),
               ParseError);
  EXPECT_THROW(model_from_json(R"({"basis": "xx", "m_I": 1, "m_O": 0, "n": 0,
                                   "biases": [0], "couplings": []})"),
               ParseError);
}
