// Placeholder translation unit; implementation follows.
namespace exclab {}
