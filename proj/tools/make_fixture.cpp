#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sdesql/executor.hpp"

// Usage: make_fixture <source-dir> <dest-dir> <db_id>
// Copies the questions file and descriptions, builds the database from schema.sql.
int main(int argc, char** argv) {
    namespace fs = std::filesystem;
    if (argc != 4) {
        std::cerr << "usage: make_fixture SRC DEST DB_ID\n";
        return 2;
    }
    fs::path src = argv[1], dest = argv[2];
    std::string db_id = argv[3];
    try {
        fs::path db_dir = dest / "databases" / db_id;
        fs::create_directories(db_dir);
        fs::copy_file(src / "dev.json", dest / "dev.json", fs::copy_options::overwrite_existing);
        if (fs::exists(src / "database_description")) {
            fs::copy(src / "database_description", db_dir / "database_description",
                     fs::copy_options::recursive | fs::copy_options::overwrite_existing);
        }
        std::ifstream in(src / "schema.sql");
        if (!in) throw std::runtime_error("missing schema.sql");
        std::stringstream script;
        script << in.rdbuf();
        sdesql::create_database_from_script(db_dir / (db_id + ".sqlite"), script.str());
    } catch (const std::exception& e) {
        std::cerr << "make_fixture: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
