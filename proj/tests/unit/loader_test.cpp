#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "popaudit/errors.hpp"
#include "popaudit/loader.hpp"

namespace popaudit {
namespace {

using testing::scratch_dir;
using testing::write_text;

LoadOptions explicit_1_5() {
  LoadOptions o;
  o.rating_range = RatingRange{1, 5};
  return o;
}

TEST(Loader, SingleRatingSingleGenre) {
  auto dir = scratch_dir("loader_single");
  write_text(dir / "r.csv", "user,item,rating\n0,0,4.0\n");
  write_text(dir / "g.csv", "item,genres\n0,rock\n");
  auto d = load_dataset(dir / "r.csv", dir / "g.csv", explicit_1_5());
  EXPECT_EQ(d.table.size(), 1u);
  EXPECT_EQ(d.catalog.genre_count(), 1u);
  EXPECT_EQ(d.catalog.genre_name(0), "rock");
  EXPECT_EQ(d.dropped_ratings, 0u);
}

TEST(Loader, ItemsWithoutGenresAreDropped) {
  auto dir = scratch_dir("loader_drop");
  write_text(dir / "r.csv", "user,item,rating\n1,1,4\n2,1,3\n1,2,5\n2,2,2\n3,2,1\n");
  write_text(dir / "g.csv", "item,genres\n1,rock|pop\n");
  auto d = load_dataset(dir / "r.csv", dir / "g.csv", explicit_1_5());
  EXPECT_EQ(d.table.size(), 2u);
  EXPECT_EQ(d.dropped_ratings, 3u);
  EXPECT_EQ(d.dropped_items, 1u);
  EXPECT_EQ(d.catalog.genre_count(), 2u);
}

TEST(Loader, MalformedRowReportsLine) {
  auto dir = scratch_dir("loader_bad");
  write_text(dir / "r.csv", "user,item,rating\n1,1,4\n\n1,x,4\n");
  write_text(dir / "g.csv", "item,genres\n1,rock\n");
  try {
    load_dataset(dir / "r.csv", dir / "g.csv", explicit_1_5());
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_EQ(e.line(), 4u);
    EXPECT_NE(std::string(e.what()).find("r.csv:4"), std::string::npos);
  }
}

TEST(Loader, WrongFieldCount) {
  auto dir = scratch_dir("loader_fields");
  write_text(dir / "r.csv", "user,item,rating\n1,1\n");
  write_text(dir / "g.csv", "item,genres\n1,rock\n");
  EXPECT_THROW(load_dataset(dir / "r.csv", dir / "g.csv", explicit_1_5()), LoadError);
}

TEST(Loader, DuplicatePairRejected) {
  auto dir = scratch_dir("loader_dup");
  write_text(dir / "r.csv", "user,item,rating\n1,1,4\n1,1,3\n");
  write_text(dir / "g.csv", "item,genres\n1,rock\n");
  EXPECT_THROW(load_dataset(dir / "r.csv", dir / "g.csv", explicit_1_5()), DatasetError);
}

TEST(Loader, OutOfRangeRatingRejected) {
  auto dir = scratch_dir("loader_range");
  write_text(dir / "r.csv", "user,item,rating\n1,1,9\n");
  write_text(dir / "g.csv", "item,genres\n1,rock\n");
  EXPECT_THROW(load_dataset(dir / "r.csv", dir / "g.csv", explicit_1_5()), DatasetError);
}

TEST(Loader, MissingFileIsLoadError) {
  auto dir = scratch_dir("loader_missing");
  EXPECT_THROW(load_dataset(dir / "nope.csv", dir / "g.csv", explicit_1_5()), LoadError);
}

TEST(Loader, QuotedFieldsAndCrLf) {
  auto dir = scratch_dir("loader_quotes");
  write_text(dir / "r.csv", "user,item,rating\r\n1,1,\"4\"\r\n");
  write_text(dir / "g.csv", "item,genres\r\n1,\"Children's|Sci-Fi\"\r\n");
  auto d = load_dataset(dir / "r.csv", dir / "g.csv", explicit_1_5());
  EXPECT_EQ(d.catalog.genre_count(), 2u);
  EXPECT_EQ(d.catalog.genre_name(0), "Children's");
}

TEST(Loader, PlayCountsNormalisedPerUser) {
  auto dir = scratch_dir("loader_playcount");
  write_text(dir / "r.csv", "user,item,plays\n1,1,2\n1,2,51\n1,3,100\n2,1,7\n");
  write_text(dir / "g.csv", "item,genres\n1,rock\n2,pop\n3,rap\n");
  LoadOptions o;
  o.schema = DatasetSchema::PlayCount;
  auto d = load_dataset(dir / "r.csv", dir / "g.csv", o);
  EXPECT_EQ(d.table.range(), (RatingRange{1, 1000}));
  const auto u1 = *d.table.find_user(1);
  const auto r = d.table.user_ratings(u1);
  EXPECT_DOUBLE_EQ(r[0].value, 1.0);
  EXPECT_DOUBLE_EQ(r[1].value, 500.5);
  EXPECT_DOUBLE_EQ(r[2].value, 1000.0);
  EXPECT_DOUBLE_EQ(d.table.user_ratings(*d.table.find_user(2))[0].value, 1000.0);
}

TEST(Loader, MixedSchemaFillsImplicitRows) {
  auto dir = scratch_dir("loader_mixed");
  write_text(dir / "r.csv", "user,item,rating,implicit\n1,1,3,0\n1,2,,1\n2,1,8,false\n");
  write_text(dir / "g.csv", "item,genres\n1,Action\n2,Comedy\n");
  LoadOptions o;
  o.schema = DatasetSchema::Mixed;
  o.rating_range = RatingRange{1, 10};
  o.implicit_fill = 10;
  auto d = load_dataset(dir / "r.csv", dir / "g.csv", o);
  const auto u1 = *d.table.find_user(1);
  EXPECT_DOUBLE_EQ(d.table.user_ratings(u1)[1].value, 10.0);
}

TEST(Loader, WriteThenReadRoundTrip) {
  auto dir = scratch_dir("loader_roundtrip");
  write_text(dir / "r.csv", "user,item,rating\n3,1,4\n1,2,2.5\n");
  write_text(dir / "g.csv", "item,genres\n1,rock|pop\n2,jazz\n");
  auto d = load_dataset(dir / "r.csv", dir / "g.csv", explicit_1_5());
  write_ratings(dir / "r2.csv", d.table, ',');
  write_genres(dir / "g2.csv", d.table, d.catalog, ',');
  auto e = load_dataset(dir / "r2.csv", dir / "g2.csv", explicit_1_5());
  ASSERT_EQ(e.table.size(), d.table.size());
  for (std::size_t p = 0; p < d.table.size(); ++p) {
    EXPECT_EQ(e.table[p].value, d.table[p].value);
    EXPECT_EQ(e.table.user_id(e.table[p].user), d.table.user_id(d.table[p].user));
  }
  EXPECT_EQ(e.catalog.genre_count(), 3u);
}

TEST(Loader, SchemaNames) {
  EXPECT_EQ(parse_schema("playcount"), DatasetSchema::PlayCount);
  EXPECT_EQ(schema_name(DatasetSchema::Mixed), "mixed");
  EXPECT_FALSE(parse_schema("bogus"));
}

}  // namespace
}  // namespace popaudit
