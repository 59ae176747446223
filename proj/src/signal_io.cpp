#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "previewctl/errors.hpp"
#include "previewctl/lti.hpp"

namespace previewctl {
namespace {

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    while (!field.empty() && field.front() == ' ') field.erase(field.begin());
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double ParseNumber(const std::string& text, int line_no) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw InvalidInput("signal CSV line " + std::to_string(line_no) + ": cannot parse '" +
                       text + "' as a number");
  }
}

}  // namespace

Signal ReadSignalCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("signal CSV is empty");
  const auto header = SplitCsvLine(line);
  if (header.size() < 2 || header[0] != "t")
    throw InvalidInput("signal CSV header must be 't,d_1,...,d_nd'");
  const int nd = static_cast<int>(header.size()) - 1;
  for (int i = 0; i < nd; ++i)
    if (header[i + 1] != "d_" + std::to_string(i + 1))
      throw InvalidInput("signal CSV header column " + std::to_string(i + 2) + " must be d_" +
                         std::to_string(i + 1));

  std::vector<Eigen::VectorXd> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = SplitCsvLine(line);
    if (static_cast<int>(fields.size()) != nd + 1)
      throw InvalidInput("signal CSV line " + std::to_string(line_no) + ": expected " +
                         std::to_string(nd + 1) + " columns");
    const double t = ParseNumber(fields[0], line_no);
    if (t != static_cast<double>(rows.size()))
      throw InvalidInput("signal CSV line " + std::to_string(line_no) +
                         ": time index must count up from 0");
    Eigen::VectorXd sample(nd);
    for (int i = 0; i < nd; ++i) sample(i) = ParseNumber(fields[i + 1], line_no);
    rows.push_back(std::move(sample));
  }
  Eigen::MatrixXd samples(nd, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t t = 0; t < rows.size(); ++t) samples.col(static_cast<Eigen::Index>(t)) = rows[t];
  return Signal(std::move(samples));
}

Signal ReadSignalCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open signal file " + path);
  return ReadSignalCsv(in);
}

void WriteSignalCsv(std::ostream& out, const Signal& d) {
  out << "t";
  for (int i = 0; i < d.dim(); ++i) out << ",d_" << i + 1;
  out << "\n" << std::setprecision(17);
  for (int t = 0; t < d.length(); ++t) {
    out << t;
    for (int i = 0; i < d.dim(); ++i) out << "," << d.samples()(i, t);
    out << "\n";
  }
}

}  // namespace previewctl
