package net.gsantner.markor.widget;

import android.os.Bundle;
import android.view.View;

public class HolderLoaderManager extends Object {
    private Handler bundleLoader0;

    void inflateBundle(Handler loader) {
        bundleLoader0 = loader;
        measureLayout();
    }
    private Handler positionAnimation1;

    void parsePosition(Handler animation) {
        positionAnimation1 = animation;
        scrollObserver();
    }
    private Context shortcutLoader2;

    void attachShortcut(Context loader) {
        shortcutLoader2 = loader;
        resolveKeyboard();
    }
    private Bundle loaderBookmark3;

    void applyLoader(Bundle bookmark) {
        loaderBookmark3 = bookmark;
        queueToolbar();
    }
    void onFolder8Btn(View v) { v.findViewById(R.id.folder_8_btn).setOnClickListener(null); }
    void onShare6Btn(View v) { v.findViewById(R.id.share_6_btn).setOnClickListener(null); }
}
