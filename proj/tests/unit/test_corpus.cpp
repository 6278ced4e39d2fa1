#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "smell/corpus.hpp"
#include "smell/error.hpp"

using namespace smell;

namespace {

const char* kSmallCsv =
    "id,project,language,file_path,line_start,line_end,comment,code,label\n"
    "a,p1,java,A.java,3,3,// increment i,i++;,Obvious\n"
    "b,p1,python,a.py,,,# TODO fix,,task\n"
    "c,p2,,,,,\"multi, line\ncomment\",NA,not a smell\n";

Dataset make(std::initializer_list<std::pair<const char*, SmellLabel>> rows) {
  Dataset d;
  int i = 0;
  for (const auto& [text, label] : rows) {
    CommentRecord r;
    r.id = "r" + std::to_string(i++);
    r.comment_text = text;
    r.label = label;
    d.records.push_back(r);
  }
  return d;
}

Dataset with_counts(const std::vector<std::pair<SmellLabel, std::size_t>>& counts) {
  Dataset d;
  std::size_t id = 0;
  for (const auto& [label, n] : counts) {
    for (std::size_t i = 0; i < n; ++i) {
      CommentRecord r;
      r.id = "x" + std::to_string(id++);
      r.comment_text = "comment " + std::to_string(id);
      r.label = label;
      d.records.push_back(r);
    }
  }
  return d;
}

}  // namespace

TEST_CASE("csv parse") {
  const auto d = parse_dataset(kSmallCsv, DatasetFormat::Csv);
  REQUIRE(d.size() == 3);
  CHECK(d.records[0].language == Language::Java);
  CHECK(d.records[0].line_span == LineSpan{3, 3});
  CHECK(d.records[0].code_segment == "i++;");
  CHECK(d.records[0].label == SmellLabel::Obvious);
  CHECK_FALSE(d.records[1].line_span);
  CHECK_FALSE(d.records[1].code_segment);
  CHECK(d.records[1].label == SmellLabel::Task);
  CHECK(d.records[2].comment_text == "multi, line\ncomment");
  CHECK(d.records[2].code_segment == "NA");
  CHECK(d.records[2].language == Language::Unknown);
  CHECK(d.records[2].label == SmellLabel::NotASmell);
}

TEST_CASE("csv and jsonl round trip") {
  const auto d = parse_dataset(kSmallCsv, DatasetFormat::Csv);
  for (auto f : {DatasetFormat::Csv, DatasetFormat::Jsonl}) {
    const auto back = parse_dataset(serialize_dataset(d, f), f);
    CHECK(back.records == d.records);
    CHECK(dataset_hash(back) == dataset_hash(d));
  }
}

TEST_CASE("file round trip and format detection") {
  const auto dir = std::filesystem::temp_directory_path() / "smell_corpus_test";
  std::filesystem::remove_all(dir);
  const auto d = parse_dataset(kSmallCsv, DatasetFormat::Csv);
  save_dataset(d, dir / "d.jsonl", format_for_path(dir / "d.jsonl"));
  CHECK(format_for_path(dir / "d.jsonl") == DatasetFormat::Jsonl);
  CHECK(format_for_path(dir / "d.csv") == DatasetFormat::Csv);
  const auto back = load_dataset(dir / "d.jsonl", DatasetFormat::Jsonl);
  CHECK(back.records == d.records);
  CHECK(back.provenance.format == DatasetFormat::Jsonl);
  std::filesystem::remove_all(dir);
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_dataset("", DatasetFormat::Csv), FormatError);
  CHECK_THROWS_AS(parse_dataset("id,text\n1,x\n", DatasetFormat::Csv), FormatError);
  CHECK_THROWS_AS(parse_dataset("id,comment,label\n1,x,attribution\n", DatasetFormat::Csv), FormatError);
  CHECK_THROWS_AS(parse_dataset("id,comment\n1,   \n", DatasetFormat::Csv), FormatError);
  CHECK_THROWS_AS(parse_dataset("id,comment\n1,a\n1,b\n", DatasetFormat::Csv), FormatError);
  CHECK_THROWS_AS(parse_dataset("id,comment,line_start,line_end\n1,a,5,2\n", DatasetFormat::Csv), FormatError);
  CHECK_THROWS_AS(parse_dataset("id,comment,language\n1,a,cobol\n", DatasetFormat::Csv), FormatError);
  CHECK_THROWS_AS(parse_dataset("{\"comment\": 3}\n", DatasetFormat::Jsonl), FormatError);
  CHECK_THROWS_AS(parse_dataset("not json\n", DatasetFormat::Jsonl), FormatError);
}

TEST_CASE("unknown labels are all reported together") {
  try {
    parse_dataset("id,comment,label\n1,a,foo\n2,b,obvious\n3,c,bar\n", DatasetFormat::Csv);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("foo") != std::string::npos);
    CHECK(msg.find("bar") != std::string::npos);
  }
}

TEST_CASE("dedup keeps the first exact (text, label) pair") {
  const auto d = make({{"same", SmellLabel::Obvious},
                       {"same", SmellLabel::Obvious},
                       {"same", SmellLabel::Vague},
                       {"Same", SmellLabel::Obvious}});
  const auto r = dedup(d);
  CHECK(r.removed == 1);
  REQUIRE(r.dataset.size() == 3);
  CHECK(r.dataset.records[0].id == "r0");
  CHECK(r.dataset.records[1].id == "r2");
  CHECK(r.dataset.records[2].id == "r3");
}

TEST_CASE("minority filter at 30") {
  const auto d = with_counts({{SmellLabel::Obvious, 40}, {SmellLabel::Task, 30}, {SmellLabel::Vague, 29}});
  const auto r = remove_minority_classes(d);
  CHECK(r.dataset.size() == 70);
  REQUIRE(r.report.size() == 3);
  CHECK(r.report[0].label == SmellLabel::Obvious);
  CHECK(r.report[0].kept);
  CHECK(r.report[1].label == SmellLabel::Task);
  CHECK(r.report[1].kept);
  CHECK(r.report[2].label == SmellLabel::Vague);
  CHECK(r.report[2].count == 29);
  CHECK_FALSE(r.report[2].kept);
}

TEST_CASE("label encoding") {
  const std::vector<SmellLabel> train{SmellLabel::Vague, SmellLabel::Obvious, SmellLabel::Vague};
  const auto enc = LabelEncoding::fit(train);
  CHECK(enc.size() == 2);
  CHECK(enc.encode(SmellLabel::Obvious) == 0);
  CHECK(enc.encode(SmellLabel::Vague) == 1);
  CHECK(enc.decode(1) == SmellLabel::Vague);
  CHECK_FALSE(enc.contains(SmellLabel::Task));
  CHECK_THROWS_AS(enc.encode(SmellLabel::Task), InvalidArgument);
  CHECK_THROWS_AS(enc.decode(2), InvalidArgument);
  CHECK_THROWS_AS(LabelEncoding::fit(std::vector<SmellLabel>{}), InvalidArgument);
  for (int c = 0; c < 2; ++c) CHECK(enc.encode(enc.decode(c)) == c);
}

TEST_CASE("stratified quota totals round(n * fraction)") {
  ClassHistogram h{};
  // 2189 records spread unevenly over all classes
  const std::array<std::size_t, kLabelCount> counts{41, 131, 37, 229, 74, 1217, 197, 89, 53, 121};
  std::copy(counts.begin(), counts.end(), h.begin());
  REQUIRE(total(h) == 2189);
  const auto q = stratified_test_quota(h, 0.2);
  CHECK(total(q) == 438);
  for (std::size_t c = 0; c < kLabelCount; ++c) {
    CHECK(q[c] >= h[c] / 5);
    CHECK(q[c] <= h[c] / 5 + 1);
  }
  CHECK(total(stratified_test_quota(h, 0.0)) == 0);
  CHECK(total(stratified_test_quota(h, 1.0)) == 2189);
  CHECK_THROWS_AS(stratified_test_quota(h, 1.5), InvalidArgument);
}

TEST_CASE("stratified split") {
  const auto d = with_counts({{SmellLabel::Obvious, 50}, {SmellLabel::Task, 20}, {SmellLabel::Vague, 10}});
  const auto s = stratified_split(d, 0.2, 11);
  CHECK(s.test.size() == 16);
  CHECK(s.train.size() == 64);
  const auto ht = histogram(s.test);
  CHECK(ht[static_cast<std::size_t>(SmellLabel::Obvious)] == 10);
  CHECK(ht[static_cast<std::size_t>(SmellLabel::Task)] == 4);
  CHECK(ht[static_cast<std::size_t>(SmellLabel::Vague)] == 2);

  std::set<std::string> ids;
  for (const auto& r : s.train.records) ids.insert(r.id);
  for (const auto& r : s.test.records) CHECK(ids.insert(r.id).second);
  CHECK(ids.size() == d.size());

  const auto again = stratified_split(d, 0.2, 11);
  CHECK(again.test.records == s.test.records);
  const auto other = stratified_split(d, 0.2, 12);
  CHECK(other.test.records != s.test.records);
}

TEST_CASE("dataset hash ignores provenance but not content") {
  auto a = make({{"x", SmellLabel::Obvious}});
  auto b = a;
  b.provenance.source_path = "elsewhere";
  CHECK(dataset_hash(a) == dataset_hash(b));
  b.records[0].label = SmellLabel::Vague;
  CHECK(dataset_hash(a) != dataset_hash(b));
}

TEST_CASE("annotation agreement") {
  const std::map<std::string, std::string> a{{"1", "int x = 1;  \n"}, {"2", "foo();"}, {"3", "NA"}, {"4", "a\n b"}};
  const std::map<std::string, std::string> b{{"1", "int x = 1;"}, {"2", "bar();"}, {"3", "NA"}, {"4", "a \n b\n\n"}};
  const auto r = annotation_agreement(a, b);
  CHECK(r.agreements == 3);
  CHECK(r.disagreements == 1);
  CHECK(r.rate == doctest::Approx(0.75));
  CHECK(r.disagreeing_ids == std::vector<std::string>{"2"});
  CHECK_THROWS_AS(annotation_agreement(a, {{"1", "x"}}), InvalidArgument);
}
