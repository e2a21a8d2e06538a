#include <gtest/gtest.h>

#include <filesystem>

#include "oht/acceptance.hpp"

using namespace oht;

namespace {

acceptance::SuiteOptions scratch(const std::string& name) {
  acceptance::SuiteOptions opt;
  opt.out_dir = std::filesystem::temp_directory_path() / ("oht-acceptance-" + name);
  opt.quick = true;
  std::filesystem::remove_all(opt.out_dir);
  return opt;
}

}  // namespace

TEST(AcceptanceChecks, GdIdentityPassesOnCleanImplementation) {
  EXPECT_TRUE(acceptance::check_gd_identity(scratch("clean")).passed);
}

TEST(AcceptanceChecks, GdIdentityCatchesCorruptedGd) {
  auto corrupted = [](const OutlierSet& B, const OutlierSet& C, const Scenario& sc) {
    return gd(B, C, sc) * (1.0 + 1e-9);
  };
  const auto r = acceptance::check_gd_identity(scratch("mutant"), corrupted);
  EXPECT_FALSE(r.passed) << r.detail;
}

TEST(AcceptanceChecks, HandDetectionAndOrthant) {
  const auto opt = scratch("small");
  EXPECT_TRUE(acceptance::check_hand_detection(opt).passed);
  EXPECT_TRUE(acceptance::check_orthant(opt).passed);
  EXPECT_TRUE(acceptance::check_gd_expectation(opt).passed);
}

TEST(AcceptanceChecks, CsvTreeComparison) {
  const auto a = scratch("tree-a"), b = scratch("tree-b");
  acceptance::check_hand_detection(a);
  acceptance::check_hand_detection(b);
  EXPECT_EQ(acceptance::detail::compare_csv_trees(a.out_dir, b.out_dir), "");
  std::ofstream(b.out_dir / "hand_detection.csv", std::ios::app) << "extra\n";
  EXPECT_NE(acceptance::detail::compare_csv_trees(a.out_dir, b.out_dir), "");
}
