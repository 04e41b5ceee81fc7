pytest_plugins = ["nanobridge_kpa.testing"]
