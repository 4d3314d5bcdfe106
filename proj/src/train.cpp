#include "infpos/train.hpp"

#include <fstream>

namespace infpos {

void write_history_csv(const std::string& path, const std::vector<TrainHistoryRow>& rows) {
  std::ofstream os(path);
  if (!os) throw Error(Errc::io, "write_history_csv: cannot open " + path);
  os << "epoch,lr,fit_loss,val_loss\n";
  os.precision(17);
  for (const auto& r : rows)
    os << r.epoch << ',' << r.lr << ',' << r.fit_loss << ',' << r.val_loss << '\n';
  if (!os) throw Error(Errc::io, "write_history_csv: write failed for " + path);
}

}  // namespace infpos
