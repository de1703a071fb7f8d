#include "granflow/config_file.hpp"
#include "granflow/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace granflow;

TEST(KeyValueFile, ParsesCommentsAndBlankLines)
{
  auto cfg = KeyValueFile::parse("\n# header\n  a = 1.5  \nname = hello world # trailing\n\n");
  EXPECT_TRUE(cfg.contains("a"));
  EXPECT_EQ(cfg.take_double("a", 0.0), 1.5);
  EXPECT_EQ(cfg.take_string("name", ""), "hello world");
  EXPECT_NO_THROW(cfg.reject_unconsumed());
}

TEST(KeyValueFile, ErrorsCarryLineNumbers)
{
  try {
    KeyValueFile::parse("a = 1\nthis line is broken\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 2);
  }
  try {
    KeyValueFile::parse("a = 1\nb = 2\na = 3\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  auto cfg = KeyValueFile::parse("x = 1\ny = abc\n");
  try {
    cfg.take_double("y");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 2);
  }
}

TEST(KeyValueFile, UnknownKeysRejected)
{
  auto cfg = KeyValueFile::parse("known = 1\nunknown = 2\n");
  cfg.take_double("known");
  try {
    cfg.reject_unconsumed();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_NE(std::string(e.what()).find("unknown"), std::string::npos);
  }
}

TEST(KeyValueFile, TypedAccessors)
{
  auto cfg = KeyValueFile::parse("n = 42\nflag = true\nlist = 1 2.5 -3\nangle = 30deg\nrad = 0.5rad\n");
  EXPECT_EQ(cfg.take_int("n", 0), 42);
  EXPECT_TRUE(cfg.take_bool("flag", false));
  const auto list = cfg.take_doubles("list");
  ASSERT_TRUE(list);
  EXPECT_EQ(list->size(), 3u);
  EXPECT_EQ((*list)[2], -3.0);
  EXPECT_NEAR(*cfg.take_angle("angle"), std::numbers::pi / 6, 1e-15);
  EXPECT_EQ(*cfg.take_angle("rad"), 0.5);
  EXPECT_EQ(cfg.take_double("missing", 7.0), 7.0);
}

TEST(KeyValueFile, SetOverridesFileValue)
{
  auto cfg = KeyValueFile::parse("d = 1e-3\n");
  cfg.set("d", "2e-3");
  EXPECT_EQ(cfg.take_double("d", 0.0), 2e-3);
}

TEST(ParseDouble, StrictFullConsumption)
{
  EXPECT_EQ(parse_double("1e-3"), 1e-3);
  EXPECT_EQ(parse_double(" 2.5 "), 2.5);
  EXPECT_THROW(parse_double("1.5x"), ConfigError);
  EXPECT_THROW(parse_double(""), ConfigError);
  EXPECT_THROW(parse_angle("30"), ConfigError);
  EXPECT_THROW(parse_angle("30grad"), ConfigError);
}
