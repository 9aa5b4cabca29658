#include "graphk0/numeric.hpp"

#include <gtest/gtest.h>

using namespace graphk0;

TEST(Numeric, FloorAndCeilRoundTowardInfinities) {
  EXPECT_EQ(floor_of(Rat(-7, 2)), -4);
  EXPECT_EQ(ceil_of(Rat(-7, 2)), -3);
  EXPECT_EQ(floor_of(Rat(7, 2)), 3);
  EXPECT_EQ(ceil_of(Rat(6, 2)), 3);
}

TEST(Numeric, ModFloorIsNonnegative) {
  EXPECT_EQ(mod_floor(-1, 3), 2);
  EXPECT_EQ(mod_floor(7, 3), 1);
  EXPECT_EQ(mod_floor(0, 5), 0);
}

TEST(Numeric, GcdAndLcm) {
  EXPECT_EQ(gcd_of(-12, 18), 6);
  EXPECT_EQ(gcd_of(0, 0), 0);
  EXPECT_EQ(lcm_of(4, 6), 12);
}

TEST(Numeric, RationalText) {
  EXPECT_EQ(to_string(parse_rational("2/4")), "1/2");
  EXPECT_EQ(to_string(Rat(3)), "3");
  EXPECT_EQ(parse_rational("-6/4"), Rat(-3, 2));
  EXPECT_THROW(parse_rational("1/0"), std::invalid_argument);
  EXPECT_THROW(parse_integer("12x"), std::invalid_argument);
}

TEST(Numeric, BigValuesStayExact) {
  Int big = parse_integer("123456789012345678901234567890");
  EXPECT_EQ(to_string(Int(big * big)), "15241578753238836750495351562536198787501905199875019052100");
  EXPECT_FALSE(fits_long(big));
}
