from asianpath.cli import main

raise SystemExit(main())
