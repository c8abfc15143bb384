// Regenerates the shipped demo dataset and the golden pipeline outputs the
// acceptance suite compares against. Run after any intentional change to
// the demo data, the learners, or the detect output formats:
//   golden_gen <project root>
#include <cstdio>
#include <filesystem>

#include "rashodet/commands.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: golden_gen <project root>\n");
        return 2;
    }
    const fs::path root(argv[1]);

    try {
        fs::create_directories(root / "data");
        const fs::path data_csv = root / "data" / "demo.csv";
        rashodet::write_csv_file(data_csv.string(), rashodet::make_demo_dataset());
        std::printf("wrote %s\n", data_csv.string().c_str());

        const fs::path scratch = fs::temp_directory_path() / "rashodet_golden_gen";
        std::error_code ec;
        fs::remove_all(scratch, ec);

        rashodet::TrainOptions train;
        train.data_path = data_csv.string();
        train.target = "outcome";
        train.positive_label = "favorable";
        train.out_dir = (scratch / "train").string();
        rashodet::cmd_train(train);

        rashodet::DetectOptions detect;
        detect.data_path = data_csv.string();
        detect.target = "outcome";
        detect.positive_label = "favorable";
        detect.models_path = (scratch / "train" / "models.json").string();
        detect.out_dir = (scratch / "detect").string();
        rashodet::cmd_detect(detect);

        const fs::path golden = root / "tests" / "golden";
        fs::create_directories(golden);
        const auto ship = [&](const fs::path& from, const char* name) {
            fs::copy_file(from, golden / name, fs::copy_options::overwrite_existing);
            std::printf("wrote %s\n", (golden / name).string().c_str());
        };
        ship(scratch / "detect" / "result.json", "result.json");
        ship(scratch / "detect" / "summary.csv", "summary.csv");
        ship(scratch / "train" / "metrics.csv", "metrics.csv");
        fs::remove_all(scratch, ec);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "golden_gen failed: %s\n", e.what());
        return 1;
    }
    return 0;
}
