#include <gtest/gtest.h>

#include <sstream>
#include <stdexcept>

#include "otrsens/datagen.hpp"
#include "otrsens/dataset_io.hpp"

using namespace otrsens;

TEST(DatasetCsv, RoundTripIsBitExact) {
  GenerativeConfig cfg;
  cfg.n = 200;
  const Dataset data = generate_trial(cfg, 9, 0).data;
  std::stringstream ss;
  write_dataset_csv(ss, data);
  const Dataset back = read_dataset_csv(ss);
  ASSERT_EQ(back.size(), data.size());
  ASSERT_EQ(back.dim_x(), 2u);
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(back[i].x, data[i].x);
    EXPECT_EQ(back[i].z, data[i].z);
    EXPECT_EQ(back[i].a, data[i].a);
    EXPECT_EQ(back[i].y, data[i].y);
  }
}

TEST(DatasetCsv, HeaderNamesCovariatesThenZAY) {
  const Dataset d({Observation{{0.25, -1.5, 3.0}, -1, 0, 2.0}}, 3);
  std::stringstream ss;
  write_dataset_csv(ss, d);
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header, "x1,x2,x3,z,a,y");
}

TEST(DatasetCsv, ReportsLineOfMalformedInput) {
  std::stringstream bad("x1,z,a,y\n0.5,1,1,2.0\n0.5,1,banana,2.0\n");
  try {
    read_dataset_csv(bad);
    FAIL() << "expected an exception";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  std::stringstream wrong_cols("x1,z,a,y\n0.5,1,1\n");
  EXPECT_THROW(read_dataset_csv(wrong_cols), std::invalid_argument);
  std::stringstream bad_header("x1,a,z,y\n");
  EXPECT_THROW(read_dataset_csv(bad_header), std::invalid_argument);
}
