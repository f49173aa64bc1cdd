#include "risa/evalharness/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "risa/core/error.hpp"

namespace risa {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void draw_chart(const std::vector<ConsistencyReport>& reports, const std::filesystem::path& path) {
  const int bar = 70;
  const int gap = 30;
  const int left = 60;
  const int top = 30;
  const int plot_h = 300;
  const int width = left + static_cast<int>(reports.size()) * (bar + gap) + gap;
  const int height = top + plot_h + 60;
  cv::Mat img(height, width, CV_8UC3, cv::Scalar(255, 255, 255));
  const auto y_of = [&](double v) { return top + static_cast<int>((1.0 - v) * plot_h + 0.5); };

  for (int tick = 0; tick <= 10; tick += 2) {
    const int y = y_of(tick / 10.0);
    cv::line(img, {left - 5, y}, {width - 10, y}, cv::Scalar(225, 225, 225), 1);
    cv::putText(img, std::to_string(tick * 10) + "%", {5, y + 4}, cv::FONT_HERSHEY_SIMPLEX, 0.4,
                cv::Scalar(60, 60, 60), 1, cv::LINE_AA);
  }
  const int chance = y_of(0.5);
  cv::line(img, {left - 5, chance}, {width - 10, chance}, cv::Scalar(0, 0, 200), 1);

  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    const int x0 = left + gap / 2 + static_cast<int>(i) * (bar + gap);
    cv::rectangle(img, {x0, y_of(std::clamp(r.mean_consistency, 0.0, 1.0))},
                  {x0 + bar, y_of(0.0)}, cv::Scalar(180, 120, 40), cv::FILLED);
    const int cx = x0 + bar / 2;
    const int hi = y_of(std::clamp(r.mean_consistency + r.std, 0.0, 1.0));
    const int lo = y_of(std::clamp(r.mean_consistency - r.std, 0.0, 1.0));
    cv::line(img, {cx, hi}, {cx, lo}, cv::Scalar(0, 0, 0), 1);
    cv::line(img, {cx - 8, hi}, {cx + 8, hi}, cv::Scalar(0, 0, 0), 1);
    cv::line(img, {cx - 8, lo}, {cx + 8, lo}, cv::Scalar(0, 0, 0), 1);
    cv::putText(img, r.metric_name, {x0, y_of(0.0) + 18}, cv::FONT_HERSHEY_SIMPLEX, 0.45,
                cv::Scalar(0, 0, 0), 1, cv::LINE_AA);
    cv::putText(img, fixed(100.0 * r.mean_consistency, 1), {x0, y_of(0.0) + 38},
                cv::FONT_HERSHEY_SIMPLEX, 0.4, cv::Scalar(60, 60, 60), 1, cv::LINE_AA);
  }
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), img);
  } catch (const cv::Exception&) {
    ok = false;
  }
  if (!ok) fail(ErrorKind::Io, "cannot write chart " + path.string());
}

}  // namespace

void write_report_csv(const std::vector<ConsistencyReport>& reports, std::ostream& out) {
  std::size_t folds = 0;
  for (const auto& r : reports) folds = std::max(folds, r.fold_values.size());
  out << "metric,mean,std,n";
  for (std::size_t f = 0; f < folds; ++f) out << ",fold" << f + 1;
  out << '\n';
  for (const auto& r : reports) {
    out << r.metric_name << ',' << fixed(r.mean_consistency, 6) << ',' << fixed(r.std, 6) << ','
        << r.n_triplets;
    for (std::size_t f = 0; f < folds; ++f) {
      out << ',';
      if (f < r.fold_values.size()) out << fixed(r.fold_values[f], 6);
    }
    out << '\n';
  }
}

std::vector<ConsistencyReport> read_report_csv(std::istream& in) {
  std::vector<ConsistencyReport> out;
  std::string line;
  std::size_t line_no = 0;
  std::size_t folds = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream row(line);
    for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    const std::string where = "report line " + std::to_string(line_no) + ": ";
    if (line_no == 1) {
      if (cells.size() < 4 || cells[0] != "metric" || cells[1] != "mean" || cells[2] != "std" ||
          cells[3] != "n") {
        fail(ErrorKind::Parse, where + "expected header metric,mean,std,n,...");
      }
      folds = cells.size() - 4;
      continue;
    }
    if (cells.size() != folds + 4) fail(ErrorKind::Parse, where + "wrong number of columns");
    ConsistencyReport r;
    r.metric_name = cells[0];
    try {
      std::size_t used = 0;
      r.mean_consistency = std::stod(cells[1]);
      r.std = std::stod(cells[2]);
      r.n_triplets = std::stoul(cells[3], &used);
      if (used != cells[3].size()) throw std::invalid_argument(cells[3]);
      for (std::size_t f = 0; f < folds; ++f) {
        if (!cells[4 + f].empty()) r.fold_values.push_back(std::stod(cells[4 + f]));
      }
    } catch (const std::exception&) {
      fail(ErrorKind::Parse, where + "malformed number");
    }
    out.push_back(std::move(r));
  }
  if (line_no == 0) fail(ErrorKind::Parse, "report is empty");
  return out;
}

void report(const std::vector<ConsistencyReport>& reports, const std::filesystem::path& stem) {
  if (reports.empty()) fail(ErrorKind::Config, "report needs at least one consistency report");
  auto csv_path = stem;
  csv_path += ".csv";
  auto png_path = stem;
  png_path += ".png";
  std::ofstream csv(csv_path);
  if (!csv) fail(ErrorKind::Io, "cannot write report " + csv_path.string());
  write_report_csv(reports, csv);
  csv.close();
  if (!csv) fail(ErrorKind::Io, "cannot write report " + csv_path.string());
  draw_chart(reports, png_path);
}

}  // namespace risa
