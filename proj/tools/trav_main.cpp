// Placeholder; the CLI is wired once the pipeline stages exist.
int main() { return 0; }
