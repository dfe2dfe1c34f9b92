"""Parser for key=value run configurations."""
