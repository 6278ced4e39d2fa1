#include <doctest.h>

#include <filesystem>
#include <numeric>
#include <set>

#include "smell/csv.hpp"
#include "smell/error.hpp"
#include "smell/hash.hpp"
#include "smell/io.hpp"
#include "smell/labels.hpp"
#include "smell/rng.hpp"

using namespace smell;

TEST_CASE("canonical names round trip") {
  for (auto l : kAllLabels) {
    CHECK(parse_label(to_string(l)) == l);
    CHECK(parse_label(display_name(l)) == l);
  }
  CHECK(to_string(SmellLabel::CommentedOutCode) == "commented-out-code");
  CHECK(display_name(SmellLabel::NonLocalInfo) == "Non-local info");
}

TEST_CASE("enumerator order is lexicographic over canonical names") {
  for (std::size_t i = 1; i < kLabelCount; ++i) CHECK(to_string(kAllLabels[i - 1]) < to_string(kAllLabels[i]));
}

TEST_CASE("alias spellings") {
  CHECK(parse_label("Commented out code") == SmellLabel::CommentedOutCode);
  CHECK(parse_label("commented_out_code") == SmellLabel::CommentedOutCode);
  CHECK(parse_label("NOT  A SMELL") == SmellLabel::NotASmell);
  CHECK(parse_label("Too much information") == SmellLabel::TooMuchInfo);
  CHECK(parse_label("non-local information") == SmellLabel::NonLocalInfo);
  CHECK_FALSE(parse_label("attribution"));
  CHECK_FALSE(parse_label(""));
  CHECK_FALSE(parse_label("obvious comment"));
  CHECK_THROWS_AS(parse_label_or_throw("attribution"), Error);
}

TEST_CASE("NA categories") {
  std::set<SmellLabel> na;
  for (auto l : kAllLabels)
    if (is_na_category(l)) na.insert(l);
  CHECK(na == std::set<SmellLabel>{SmellLabel::Beautification, SmellLabel::CommentedOutCode, SmellLabel::Task});
}

TEST_CASE("rng substreams are stable and distinct") {
  CHECK(derive_seed(1, "smote") == derive_seed(1, "smote"));
  CHECK(derive_seed(1, "smote") != derive_seed(2, "smote"));
  CHECK(derive_seed(1, "smote") != derive_seed(1, "split"));
  CHECK(derive_seed(1, "tree", 0) != derive_seed(1, "tree", 1));

  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  Rng r(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(r.below(3) < 3);
  }
  std::vector<int> v(20);
  std::iota(v.begin(), v.end(), 0);
  auto w = v;
  Rng s(9);
  s.shuffle(std::span<int>(w));
  CHECK(std::is_permutation(v.begin(), v.end(), w.begin()));
  CHECK(v != w);
}

TEST_CASE("sha256 known vectors") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(short_hash("abc") == "ba7816bf8f01cfea");
}

TEST_CASE("csv reader") {
  SUBCASE("quotes, embedded newlines and CRLF") {
    const auto rows = csv::parse("a,b\r\n\"x,1\",\"he said \"\"hi\"\"\nbye\"\r\nlast,\n");
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].fields == std::vector<std::string>{"x,1", "he said \"hi\"\nbye"});
    CHECK(rows[1].line == 2);
    CHECK(rows[2].line == 4);
    CHECK(rows[2].fields == std::vector<std::string>{"last", ""});
  }
  SUBCASE("BOM is skipped") {
    const auto rows = csv::parse("\xEF\xBB\xBFid\n1\n");
    CHECK(rows[0].fields[0] == "id");
  }
  SUBCASE("unterminated quote") { CHECK_THROWS_AS(csv::parse("a,\"oops\n"), FormatError); }
  SUBCASE("escape round trip") {
    const std::vector<std::string> f{"plain", "with,comma", "q\"uote", "multi\nline", ""};
    const auto rows = csv::parse(csv::format_row(f));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].fields == f);
  }
}

TEST_CASE("atomic file write") {
  const auto dir = std::filesystem::temp_directory_path() / "smell_io_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  write_file_atomic(dir / "f.txt", "hello");
  CHECK(read_file(dir / "f.txt") == "hello");
  write_file_atomic(dir / "f.txt", "again");
  CHECK(read_file(dir / "f.txt") == "again");
  CHECK_THROWS_AS(read_file(dir / "missing.txt"), Error);
  std::filesystem::remove_all(dir.parent_path());
}
