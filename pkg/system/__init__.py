# System package: configuration, files, reports and notifications
